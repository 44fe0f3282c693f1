#include <iostream>
#include <string>
#include <vector>

#include "soliton_forge/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return soliton_forge::run_cli(args, std::cout, std::cerr);
}
