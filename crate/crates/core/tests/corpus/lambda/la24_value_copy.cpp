// DRIVER
#include <iostream>

int main() {
  int original = 5;
  int seen = [original](int add) { return original + add; }(1);
  std::cout << original << " " << seen << "\n";
  return 0;
}
