// DRIVER
#include <iostream>

int main() {
  auto msg = "plain";
  std::cout << msg << "\n";
  return 0;
}
