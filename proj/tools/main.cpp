#include "copoly/cli.hpp"

int main(int argc, char** argv) { return copoly::run_cli(argc, argv); }
