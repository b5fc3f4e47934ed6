#include "netinfer/cli.hpp"

int main(int argc, char** argv) { return netinfer::cli::run(argc, argv); }
