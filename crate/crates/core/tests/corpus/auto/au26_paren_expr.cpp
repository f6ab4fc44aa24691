void f() {
  int a = 8;
  auto b = (a);
  (void)b;
}
