#include <iostream>
#include <string>
#include <vector>

#include "mixsdde/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mixsdde::cli::run(args, std::cout, std::cerr);
}
