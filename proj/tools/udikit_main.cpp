#include <iostream>
#include <string>
#include <vector>

#include "udikit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return udikit::cli::run(args, std::cout, std::cerr);
}
