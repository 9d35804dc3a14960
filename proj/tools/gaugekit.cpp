#include "gaugekit/cli.hpp"

int main(int argc, char** argv) { return gaugekit::cli_main(argc, argv); }
