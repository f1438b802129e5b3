#include "fracbound/cli.hpp"

int main(int argc, char** argv) { return fracbound::cli::run(argc, argv); }
