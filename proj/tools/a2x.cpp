#include <iostream>
#include <string>
#include <vector>

#include "a2x/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return a2x::run_cli(args, std::cout, std::cerr);
}
