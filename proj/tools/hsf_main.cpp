#include <iostream>

#include "hsf/cli.hpp"

int main(int argc, char** argv) {
    return hsf::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
