// DRIVER
#include <iostream>

int main() {
  int v = [](int x) {
    int inner = [](int y) { return y * 2; }(x);
    return inner + 1;
  }(10);
  std::cout << v << "\n";
  return 0;
}
