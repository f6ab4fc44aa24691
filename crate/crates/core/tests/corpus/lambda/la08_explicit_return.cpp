// DRIVER
#include <iostream>

int main() {
  double v = [](int x) -> double { return x / 4.0; }(10);
  std::cout << v << "\n";
  return 0;
}
