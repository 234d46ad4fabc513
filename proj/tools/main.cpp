#include "abstain/harness.hpp"

int main(int argc, char** argv) { return abstain::cli_main(argc, argv); }
