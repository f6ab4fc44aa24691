void f() {
  int v = []() { return 7; }();
  (void)v;
}
