#include "resuniv/harness.hpp"

int main(int argc, char** argv) { return resuniv::cli_main(argc, argv); }
