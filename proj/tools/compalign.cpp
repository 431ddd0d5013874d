#include <iostream>

#include "compalign/cli/commands.hpp"

int main(int argc, char** argv) {
  return compalign::cli::run_cli(argc, argv, std::cout, std::cerr);
}
