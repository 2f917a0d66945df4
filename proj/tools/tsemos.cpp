#include "tsemos/cli.hpp"

int main(int argc, char** argv) { return tsemos::run_cli(argc, argv); }
