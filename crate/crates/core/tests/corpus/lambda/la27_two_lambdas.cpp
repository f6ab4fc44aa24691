void f() {
  int first = [](int x) { return x + 10; }(0);
  int second = [](int x) { return x + 20; }(0);
  (void)(first + second);
}
