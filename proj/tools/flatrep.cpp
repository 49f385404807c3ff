#include "flatrep/cli.hpp"

int main(int argc, char** argv) { return flatrep::cli::run(argc, argv); }
