// DRIVER
#include <iostream>

class Chain {
public:
  Chain(int x, int y, int z) : a(x), b(y), c(z) {
  }
  Chain(int x, int y) : Chain(x, y, 9) {
  }
  Chain(int x) : Chain(x, 8) {
  }
  int a;
  int b;
  int c;
};

int main() {
  Chain k(7);
  std::cout << k.a << k.b << k.c << "\n";
  return 0;
}
