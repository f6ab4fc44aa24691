// DRIVER
#include <iostream>

int main() {
  int a = 33;
  int *p = &a;
  auto v = *p;
  std::cout << v << "\n";
  return 0;
}
