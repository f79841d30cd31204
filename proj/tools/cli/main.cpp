#include "cli.hpp"

int main(int argc, char** argv) { return noveltyrank::cli::run(argc, argv); }
