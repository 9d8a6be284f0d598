#include "egopriv/cli.hpp"

int main(int argc, char** argv) { return egopriv::cli::main(argc, argv); }
