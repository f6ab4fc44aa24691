// DRIVER
#include <iostream>

int main() {
  int a = 3;
  auto xp = &a, yp = xp;
  std::cout << (*xp + *yp) << "\n";
  return 0;
}
