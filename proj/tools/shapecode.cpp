#include "shapecode/cli.hpp"

int main(int argc, char** argv) { return shapecode::run_cli(argc, argv); }
