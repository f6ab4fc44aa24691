double half(double d) { return d / 2; }

void f() {
  auto h = half(9.0);
  (void)h;
}
