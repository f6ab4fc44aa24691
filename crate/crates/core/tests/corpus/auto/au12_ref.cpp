// DRIVER
#include <iostream>

int main() {
  int cell = 1;
  auto &r = cell;
  r = 9;
  std::cout << cell << "\n";
  return 0;
}
