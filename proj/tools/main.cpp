#include <iostream>
#include <string>
#include <vector>

#include "clustervar/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return clustervar::run_cli(args, std::cout, std::cerr);
}
