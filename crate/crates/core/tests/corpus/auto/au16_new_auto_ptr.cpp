void f() {
  int a = 4;
  auto *b = new auto(&a);
  delete b;
}
