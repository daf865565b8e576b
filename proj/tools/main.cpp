#include <iostream>
#include <string>
#include <vector>

#include "groupform/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return groupform::cli_dispatch(args, std::cout, std::cerr);
}
