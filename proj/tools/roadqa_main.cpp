#include <iostream>

#include "roadqa/cli.hpp"

int main(int argc, char** argv) {
    return roadqa::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
