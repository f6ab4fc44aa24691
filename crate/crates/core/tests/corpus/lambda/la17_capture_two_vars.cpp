void f() {
  int lo = 1;
  int hi = 9;
  int v = [lo, hi](int x) { return x < lo ? lo : (x > hi ? hi : x); }(11);
  (void)v;
}
