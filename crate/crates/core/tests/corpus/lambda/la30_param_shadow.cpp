void f() {
  int x = 100;
  int v = [](int x) { return x + 1; }(1);
  (void)(v + x);
}
