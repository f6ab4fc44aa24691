// DRIVER
#include <iostream>

int base() { return 19; }

int main() {
  auto v = base();
  std::cout << v << "\n";
  return 0;
}
