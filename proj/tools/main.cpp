#include <iostream>

#include "topomap/cli.hpp"

int main(int argc, char** argv) {
    return topomap::cli::run(argc, argv, std::cout, std::cerr);
}
