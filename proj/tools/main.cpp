#include <iostream>

#include "micma/cli.hpp"

int main(int argc, char** argv) {
  return micma::cli_main(argc, argv, std::cout, std::cerr);
}
