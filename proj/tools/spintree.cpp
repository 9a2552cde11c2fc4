#include <iostream>
#include <string>
#include <vector>

#include "spintree/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return spintree::cli::run(args, std::cout, std::cerr);
}
