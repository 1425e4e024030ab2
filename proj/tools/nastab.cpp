#include <iostream>

#include "nastab/cli.hpp"

int main(int argc, char** argv) {
  return nastab::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
