// DRIVER
#include <iostream>

int main() {
  int sum = 0;
  for (int i = 0; i < 4; ++i) {
    sum += [](int x) { return x * x; }(i);
  }
  std::cout << sum << "\n";
  return 0;
}
