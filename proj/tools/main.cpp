#include <iostream>

#include "alerta/cli.hpp"

int main(int argc, char** argv) {
  return alerta::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
