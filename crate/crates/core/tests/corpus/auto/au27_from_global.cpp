int shared = 21;

void f() {
  auto local = shared;
  (void)local;
}
