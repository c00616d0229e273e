#include "softabs/cli.hpp"

int main(int argc, char** argv) { return softabs::cli::run_cli(argc, argv); }
