class A {
  A() : a(1) {}
  A(string str) : s(str),
                  a(1) {
    t = "hello";
  }
  A(string str, int dbl)
      : a(1), s(str) {
    { t = "hello"; }
    a = dbl;
  }
  int a;
  string s;
  string t;
};
