// DRIVER
#include <iostream>
#include <string>

struct Settings {
  int retries { 3 };
  double timeout = 1.5;
  std::string name = "default";
};

int main() {
  Settings s;
  std::cout << s.retries << " " << s.timeout << " " << s.name << "\n";
  return 0;
}
