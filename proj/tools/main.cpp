#include <unistd.h>

#include <cstdlib>
#include <iostream>

#include "deriver/cli.hpp"

int main(int argc, char** argv) {
    bool color = isatty(STDOUT_FILENO) && !std::getenv("DERIVER_NO_COLOR");
    return deriver::run_cli({argv + 1, argv + argc}, {std::cout, std::cerr, color});
}
