#include "cli.hpp"

int main(int argc, char** argv) { return pnarm::cli::run(argc, argv); }
