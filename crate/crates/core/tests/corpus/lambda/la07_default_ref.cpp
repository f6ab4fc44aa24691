// DRIVER
#include <iostream>

int main() {
  int acc = 1;
  int step = 5;
  [&](int times) { acc += step * times; }(3);
  std::cout << acc << "\n";
  return 0;
}
