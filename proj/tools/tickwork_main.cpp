#include "tickwork/cli.hpp"

int main(int argc, char** argv) { return tickwork::run_cli(argc, argv); }
