// DRIVER
#include <iostream>

int main() {
  double v = [](double d) { return d * 1.5; }(4.0);
  std::cout << v << "\n";
  return 0;
}
