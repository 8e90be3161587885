#include "nrtlid/cli.hpp"

int main(int argc, char** argv) { return nrtlid::cli::run(argc, argv); }
