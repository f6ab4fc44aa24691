// DRIVER
#include <iostream>

int main() {
  int v = [](int x) { return x + 1; }(1) + [](int y) { return y * 3; }(2);
  std::cout << v << "\n";
  return 0;
}
