#include <string>
#include <vector>

#include "mipboost/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mipboost::run_command(args);
}
