#include <iostream>
#include <string>
#include <vector>

#include "weylscope/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return weylscope::cli::run(args, std::cout, std::cerr);
}
