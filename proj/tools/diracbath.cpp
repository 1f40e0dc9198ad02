#include "diracbath/cli.hpp"

int main(int argc, char** argv) { return diracbath::cli::main_entry(argc, argv); }
