#include "qrd/cli.hpp"

int main(int argc, char** argv) { return qrd::cli::run(argc, argv); }
