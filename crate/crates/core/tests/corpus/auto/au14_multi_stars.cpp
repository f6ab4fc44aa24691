void f() {
  int a = 2;
  auto *y = &a, **z = &y;
  (void)z;
}
