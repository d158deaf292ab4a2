#include <string>
#include <vector>

#include "ucc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ucc::cli::execute(args);
}
