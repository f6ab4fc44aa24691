void f(int flag) {
  if (flag) {
    auto v = flag;
    (void)v;
  }
}
