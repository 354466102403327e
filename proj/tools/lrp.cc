#include <exception>
#include <iostream>

#include "lrp/experiment.h"

int main(int argc, char** argv) {
  try {
    return lrp::RunCli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
