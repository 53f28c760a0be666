#include <iostream>
#include <string>
#include <vector>

#include "bhe_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bhe::cli::run(args, std::cout, std::cerr);
}
