void f() {
  int v = [](int a, int b) { return a > b ? a : b; }(2, 5);
  (void)v;
}
