#include <iostream>
#include <string>
#include <vector>

#include "crossdiff/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return crossdiff::run_cli(args, std::cout, std::cerr);
}
