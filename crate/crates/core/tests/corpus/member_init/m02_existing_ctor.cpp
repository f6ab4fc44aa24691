// DRIVER
#include <iostream>

class Counter {
public:
  Counter(int start) : value(start) {
  }
  int value;
  int step = 2;
  int limit = 10;
};

int main() {
  Counter c(4);
  std::cout << c.value + c.step + c.limit << "\n";
  return 0;
}
