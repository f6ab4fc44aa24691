void f() {
  int a = 1;
  int *p = &a;
  auto pp = &p;
  (void)pp;
}
