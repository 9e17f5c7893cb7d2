#include "tanhseed/cli.hpp"

int main(int argc, char** argv) { return tanhseed::cli_main(argc, argv); }
