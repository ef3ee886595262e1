#include "stencilnet/cli.hpp"

int main(int argc, char** argv) { return stencilnet::cli_main(argc, argv); }
