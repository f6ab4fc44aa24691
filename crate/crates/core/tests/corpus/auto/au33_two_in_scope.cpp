// DRIVER
#include <iostream>

int main() {
  auto a = 4;
  auto b = 9;
  std::cout << a + b << "\n";
  return 0;
}
