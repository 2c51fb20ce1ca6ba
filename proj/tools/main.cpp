#include "l2elogit/cli.hpp"

int main(int argc, char** argv) { return l2e::cli_dispatch(argc, argv); }
