#include <iostream>
#include <string>
#include <vector>

#include "epsctl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return epsctl::cli::run(args, std::cout, std::cerr);
}
