#include <string>
#include <vector>

#include "mdpreg/dataset.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mdpreg::cli::run_cli(args);
}
