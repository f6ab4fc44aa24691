// DRIVER
#include <iostream>

int main() {
  double xs[3] = {0.5, 1.5, 2.0};
  double total = 0;
  for (auto x : xs) {
    total += x;
  }
  std::cout << total << "\n";
  return 0;
}
