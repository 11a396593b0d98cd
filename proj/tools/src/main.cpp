#include <iostream>
#include <string>
#include <vector>

#include "kinodiff/cli/cli.hpp"

int main(int argc, char** argv) {
  return kinodiff::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
