#include "plfem/cli.hpp"

int main(int argc, char** argv) { return plfem::cli::run(argc, argv); }
