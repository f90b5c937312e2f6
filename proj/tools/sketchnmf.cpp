#include "sketchnmf/cli.hpp"

int main(int argc, char** argv) { return sketchnmf::cli::run(argc, argv); }
