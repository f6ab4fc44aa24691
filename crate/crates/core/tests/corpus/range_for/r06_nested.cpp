// DRIVER
#include <iostream>

int main() {
  int outer[2] = {1, 2};
  int inner[3] = {10, 20, 30};
  int sum = 0;
  for (int i : outer) {
    for (int j : inner) {
      sum += i * j;
    }
  }
  std::cout << sum << "\n";
  return 0;
}
