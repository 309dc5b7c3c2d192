#include "cli_main.hpp"

int main(int argc, char** argv) { return xbar::cli_main(argc, argv); }
