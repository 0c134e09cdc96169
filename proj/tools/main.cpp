#include <iostream>
#include <string>
#include <vector>

#include "scaling/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return scaling::cli::run(args, std::cout, std::cerr);
}
