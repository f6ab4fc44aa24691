// DRIVER
#include <iostream>

int triple(int x) { return x * 3; }

int main() {
  auto fp = triple;
  std::cout << fp(14) << "\n";
  return 0;
}
