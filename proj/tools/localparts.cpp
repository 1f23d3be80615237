#include <iostream>
#include <string>
#include <vector>

#include "localparts/app.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return localparts::app::run(args, std::cout, std::cerr);
}
