#include <iostream>
#include <vector>

template<class T>
using Rows = std::vector<std::vector<T> >;

int main() {
  Rows<int>::type rows;
  rows.push_back(std::vector<int>(3, 5));
  std::cout << rows[0][1] << "\n";
  return 0;
}
