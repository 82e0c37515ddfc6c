#include "scalepop/cli.hpp"

int main(int argc, char** argv) { return scalepop::cli::main_entry(argc, argv); }
