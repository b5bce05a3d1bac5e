#include "lloss_cli/commands.hpp"

int main(int argc, char** argv) { return lloss::cli::run_cli(argc, argv); }
