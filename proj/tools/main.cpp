#include "commands.hpp"

int main(int argc, char** argv) { return kqf::cli::run_main(argc, argv); }
