#include "relpath_cli.hpp"

int main(int argc, char** argv) { return relpath::cli::run_cli(argc, argv); }
