// DRIVER
#include <iostream>

int main() {
  auto *cell = new auto(17);
  std::cout << *cell << "\n";
  delete cell;
  return 0;
}
