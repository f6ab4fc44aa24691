void f() {
  int v = [](int x) { return x - 1; }(2);
  (void)v;
}
