#include <iostream>
#include <string>
#include <vector>

#include "warpcenter/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return warpcenter::cli::run(args, std::cout, std::cerr);
}
