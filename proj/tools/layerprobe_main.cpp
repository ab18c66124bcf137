#include <iostream>
#include <string>
#include <vector>

#include "layerprobe/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return layerprobe::run_cli(args, std::cout, std::cerr);
}
