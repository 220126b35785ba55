#include <string>
#include <vector>

#include "relayim/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return relayim::cli::run_main(args);
}
