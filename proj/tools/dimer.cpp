#include "dimer/runner.hpp"

int main(int argc, char** argv) { return dimer::run_command(argc, argv); }
