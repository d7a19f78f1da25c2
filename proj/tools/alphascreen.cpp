#include "alphascreen/cli.hpp"

int main(int argc, char** argv) { return alphascreen::run_cli(argc, argv); }
