#include "hfevd/cli.hpp"

int main(int argc, char** argv) { return hfevd::cli_main(argc, argv); }
