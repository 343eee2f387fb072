#include "mdobf/cli.hpp"

int main(int argc, char** argv) { return mdobf::cli_main(argc, argv); }
