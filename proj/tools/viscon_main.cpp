#include <iostream>

#include "viscon/cli.hpp"

int main(int argc, char** argv) {
  return viscon::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
