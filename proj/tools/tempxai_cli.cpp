#include <string>
#include <vector>

#include "tempxai/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tempxai::run_cli(args);
}
