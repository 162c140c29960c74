#include "cli.hpp"

int main(int argc, char** argv) { return gexp::cli::run(argc, argv); }
