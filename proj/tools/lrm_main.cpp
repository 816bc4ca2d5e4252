#include "lrm/cli.hpp"

int main(int argc, char** argv) { return lrm::cli::main(argc, argv); }
