// DRIVER
#include <iostream>

int main() {
  int base = 10;
  int v = [base](int x) { return base + x; }(5);
  std::cout << v << "\n";
  return 0;
}
