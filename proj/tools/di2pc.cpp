#include <iostream>
#include <string>
#include <vector>

#include "di2pc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return di2pc::cli::dispatch(args, std::cout, std::cerr);
}
