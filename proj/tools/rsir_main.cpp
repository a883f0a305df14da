#include "rsir/cli.hpp"

int main(int argc, char** argv) { return rsir::cli::main(argc, argv); }
