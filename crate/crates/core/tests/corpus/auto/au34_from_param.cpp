void f(long n) {
  auto copy = n;
  (void)copy;
}
