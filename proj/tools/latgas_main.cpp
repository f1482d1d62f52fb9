#include <string>
#include <vector>

#include "latgas/cli.hpp"

int main(int argc, char** argv) {
    return latgas::cli::main_with_args(std::vector<std::string>(argv + 1, argv + argc));
}
