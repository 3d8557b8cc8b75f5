#include "etas_tools/commands.hpp"

int main(int argc, char** argv) { return etas::tools::run_cli(argc, argv); }
