#include "cli.hpp"

int main(int argc, char** argv) { return k3taut::cli::run(argc, argv); }
