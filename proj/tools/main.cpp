#include <vector>

#include "sono/app.hpp"

int main(int argc, char** argv) {
  return sono::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
