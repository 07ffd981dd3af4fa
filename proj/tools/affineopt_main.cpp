#include <iostream>
#include <string>
#include <vector>

#include "affineopt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return affineopt::cli::run(std::move(args), std::cout, std::cerr);
}
