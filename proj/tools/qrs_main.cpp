#include <iostream>

#include "qrs/cli.hpp"

int main(int argc, char** argv) {
  return qrs::cli_main(argc, argv, std::cout, std::cerr);
}
