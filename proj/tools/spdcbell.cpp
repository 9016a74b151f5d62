#include <spdcbell/cli.hpp>

int main(int argc, char** argv) { return spdcbell::cli::run(argc, argv); }
