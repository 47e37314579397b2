#include "cli.hpp"

int main(int argc, char** argv) { return nanolaser::cli::main_entry(argc, argv); }
