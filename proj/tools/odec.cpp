#include "odec/harness/cli.hpp"

int main(int argc, char** argv) { return odec::harness::cli_main(argc, argv); }
