#include "amc/harness.hpp"

int main(int argc, char** argv) { return amc::cli_main(argc, argv); }
