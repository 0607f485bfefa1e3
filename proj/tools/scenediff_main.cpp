#include "scenediff/cli.hpp"

int main(int argc, char** argv) {
  return scenediff::run(std::vector<std::string>(argv + 1, argv + argc));
}
