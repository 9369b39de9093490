#include "prandtl/cli.hpp"

int main(int argc, char** argv) { return prandtl::cli::run(argc, argv); }
