// DRIVER
#include <iostream>

class Box {
public:
  Box(int w, int h) : width(w), height(h) {
  }
  Box(int side) : Box(side, side) {
  }
  int width;
  int height;
};

int main() {
  Box b(5);
  std::cout << b.width * b.height << "\n";
  return 0;
}
