#include "pairstream/harness.hpp"

int main(int argc, char** argv) {
  return pairstream::run_command(argc, argv);
}
