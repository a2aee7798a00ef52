#include "poskit/cli.hpp"

int main(int argc, char** argv) { return poskit::run_cli(argc, argv); }
