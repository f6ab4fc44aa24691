// DRIVER
#include <iostream>

int main() {
  int v = [](int x) { return x + 1; }(41);
  std::cout << v << "\n";
  return 0;
}
