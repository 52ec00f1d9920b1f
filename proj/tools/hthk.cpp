#include <iostream>
#include <string>
#include <vector>

#include "hthk/io/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hthk::io::run_command(args, std::cout, std::cerr);
}
