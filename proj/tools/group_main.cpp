// Runs one command group, so `farm local ...` works without the `viscon` prefix.
#include <iostream>

#include "viscon/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args{VISCON_GROUP};
  args.insert(args.end(), argv + 1, argv + argc);
  return viscon::run_cli(std::move(args), std::cout, std::cerr);
}
