#include "mzlab/cli.hpp"

int main(int argc, char** argv) { return mzlab::cli_main(argc, argv); }
