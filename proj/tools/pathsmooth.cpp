#include "pathsmooth/cli.hpp"

int main(int argc, char** argv) { return pathsmooth::run_cli(argc, argv); }
