void f() {
  int a = 1;
  int b = 2;
  [a, &b](int x) { b = a + x; }(3);
}
