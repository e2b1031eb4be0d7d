#include "cli.hpp"

int main(int argc, char** argv) { return robust_scatter::cli::main_entry(argc, argv); }
