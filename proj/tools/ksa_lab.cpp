#include "ksa/cli.hpp"

int main(int argc, char** argv) { return ksa::cli::main(argc, argv); }
