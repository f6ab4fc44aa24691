// DRIVER
#include <iostream>

int main() {
  int vals[3] = {2, 4, 6};
  int product = 1;
  for (int v : vals)
    product *= v;
  std::cout << product << "\n";
  return 0;
}
