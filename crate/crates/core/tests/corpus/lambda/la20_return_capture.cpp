// DRIVER
#include <iostream>

int main() {
  int secret = 99;
  int v = [secret]() { return secret; }();
  std::cout << v << "\n";
  return 0;
}
