// DRIVER
#include <iostream>

int weights[4] = {2, 3, 5, 7};

int main() {
  int sum = 0;
  for (int w : weights) {
    sum += w;
  }
  std::cout << sum << "\n";
  return 0;
}
