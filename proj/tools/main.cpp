#include <cstdio>

int main() {
  std::puts("offtrack: CLI under construction");
  return 0;
}
