#include <iostream>

#include "bench_app.hpp"

int main(int argc, char** argv) {
  return shadowbench::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
