#include <iostream>

#include "g2lab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return g2lab::cli::run(args, std::cout, std::cerr);
}
