// DRIVER
#include <iostream>

int main() {
  int total = 0;
  [&total](int x) { total += x; }(25);
  std::cout << total << "\n";
  return 0;
}
