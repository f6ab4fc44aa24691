void f(int flag) {
  if (flag) {
    [flag](int x) { (void)(flag + x); }(1);
  }
}
