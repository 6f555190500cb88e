#include <iostream>
#include <string>
#include <vector>

#include "prb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return prb::cli::dispatch(args, std::cout, std::cerr);
}
