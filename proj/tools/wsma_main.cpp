#include "cli/commands.hpp"

int main(int argc, char** argv) { return wsma::cli::run(argc, argv); }
