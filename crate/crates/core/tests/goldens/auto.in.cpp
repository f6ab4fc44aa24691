auto a = 32;
auto *b = new auto(&a);
auto xp = &a, yp = xp;
auto *y = &a, **z = &y;
auto foo(int a)
      -> decltype(a) {
  return a;
}
auto x = foo(0);
const auto & y = foo(1);
auto fp = foo;
