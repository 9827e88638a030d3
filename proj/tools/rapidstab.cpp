#include "rapidstab/cli.hpp"

int main(int argc, char** argv) { return rapidstab::run_cli(argc, argv); }
