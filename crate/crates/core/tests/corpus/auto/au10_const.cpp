void f() {
  const auto limit = 64;
  (void)limit;
}
