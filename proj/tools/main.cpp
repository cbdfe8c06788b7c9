#include "fracasym/cli.hpp"

int main(int argc, char** argv) { return fracasym::run_cli(argc, argv); }
