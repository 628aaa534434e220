#include "wuglab/cli.hpp"

int main(int argc, char** argv) { return wuglab::cli_main(argc, argv); }
