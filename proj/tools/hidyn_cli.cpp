#include <string>
#include <vector>

#include "hidyn/cli.hpp"

int main(int argc, char** argv) {
  return hidyn::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
