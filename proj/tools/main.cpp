#include <iostream>
#include <string>
#include <vector>

#include "ingarch/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ingarch::cli::run(args, std::cout, std::cerr);
}
