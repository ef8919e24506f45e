#include "hiernet/cli.hpp"

int main(int argc, char** argv) { return hiernet::run_cli(argc, argv); }
