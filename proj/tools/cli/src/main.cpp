#include <iostream>

#include "bts_cli/app.hpp"

int main(int argc, char** argv) { return bts::cli::cli_main(argc, argv, std::cout, std::cerr); }
