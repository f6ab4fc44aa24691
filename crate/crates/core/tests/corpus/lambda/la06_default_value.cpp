// DRIVER
#include <iostream>

int main() {
  int left = 3;
  int right = 4;
  int v = [=](int scale) { return (left + right) * scale; }(2);
  std::cout << v << "\n";
  return 0;
}
