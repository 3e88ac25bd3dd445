#include "episim/cli.hpp"

int main(int argc, char** argv) { return episim::cli::run(argc, argv); }
