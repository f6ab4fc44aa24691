void f() {
  int a = 5;
  auto b = a;
  (void)b;
}
