#include <iostream>
#include <string>
#include <vector>

#include "foldnorm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return foldnorm::cli::run(args, std::cout, std::cerr);
}
