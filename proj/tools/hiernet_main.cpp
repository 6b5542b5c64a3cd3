#include "hiernet/cli.hpp"

int main(int argc, char** argv) {
    return hiernet::cli_main(argc, argv);
}
