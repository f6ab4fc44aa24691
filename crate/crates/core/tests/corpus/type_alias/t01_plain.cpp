// DRIVER
#include <iostream>

using counter = unsigned long;

counter twice(counter c) { return c * 2; }

int main() {
  std::cout << twice(21) << "\n";
  return 0;
}
