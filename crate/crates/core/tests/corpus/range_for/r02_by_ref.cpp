// DRIVER
#include <iostream>

int main() {
  int data[4] = {1, 2, 3, 0};
  for (int &k : data) {
    k = k * 10;
  }
  std::cout << data[0] << data[1] << data[2] << data[3] << "\n";
  return 0;
}
