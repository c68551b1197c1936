#include <iostream>
#include <string>
#include <vector>

#include "gmecert/cli.hpp"

int main(int argc, char** argv) {
  return gmecert::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
