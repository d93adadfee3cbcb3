#include "linkforge/cli.hpp"

int main(int argc, char** argv) { return linkforge::run_cli(argc, argv); }
