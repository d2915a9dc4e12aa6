#include <string>
#include <vector>

#include "showwork/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return showwork::cli::run(args);
}
