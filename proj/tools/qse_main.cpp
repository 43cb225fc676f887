#include "qse/cli.hpp"

int main(int argc, char** argv) { return qse::run_cli(argc, argv); }
