#include "aaupower/cli.hpp"

int main(int argc, char** argv) { return aau::run_cli(argc, argv); }
