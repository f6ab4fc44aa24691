void f() {
  auto mark = 'x';
  (void)mark;
}
