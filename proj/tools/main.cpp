#include <vector>

#include "gridhub/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gridhub::run_cli(args);
}
