#include <iostream>

#include "suite.hpp"
#include "vmmr/error.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vmmr-fixturegen <output-dir>\n";
    return 2;
  }
  try {
    vmmr::cli::generate_suite(argv[1]);
  } catch (const vmmr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote suite to " << argv[1] << '\n';
  return 0;
}
