int inc(int x) { return x + 1; }

void f() {
  auto v = inc(inc(5));
  (void)v;
}
