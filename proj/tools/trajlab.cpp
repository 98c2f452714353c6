#include "trajlab/cli.hpp"

int main(int argc, char** argv) { return trajlab::cli::main(argc, argv); }
