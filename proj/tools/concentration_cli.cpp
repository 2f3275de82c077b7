#include "concentration/cli.hpp"

int main(int argc, char** argv) { return concentration::cli::run(argc, argv); }
