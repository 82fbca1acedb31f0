#include "convodyn/cli.hpp"

int main(int argc, char** argv) { return convodyn::run_cli(argc, argv); }
