#include "commands.hpp"

int main(int argc, char** argv) { return g3::cli::run(argc, argv); }
