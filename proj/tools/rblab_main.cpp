#include "rblab/cli.hpp"

int main(int argc, char** argv) {
  return rblab::cli::run(argc, argv);
}
