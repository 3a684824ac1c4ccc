#include "roundtable/cli.hpp"

int main(int argc, char** argv) { return roundtable::run_cli(argc, argv); }
