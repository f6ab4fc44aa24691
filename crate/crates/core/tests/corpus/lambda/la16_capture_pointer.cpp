// DRIVER
#include <iostream>

int main() {
  int cell = 0;
  int *p = &cell;
  [p](int v) { *p = v; }(12);
  std::cout << cell << "\n";
  return 0;
}
