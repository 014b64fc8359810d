#include "owc/cli_runner.hpp"

int main(int argc, char** argv) { return owc::runner::main_entry(argc, argv); }
