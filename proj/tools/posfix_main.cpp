#include "posfix/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return posfix::cli::main_entry(argc, argv, std::cout, std::cerr);
}
