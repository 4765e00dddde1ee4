#include "fogswitch/cli.hpp"

int main(int argc, char** argv) { return fogswitch::run_cli(argc, argv); }
