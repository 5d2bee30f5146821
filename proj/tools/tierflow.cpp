#include "tierflow/cli.hpp"

int main(int argc, char** argv) { return tierflow::cli::run(argc, argv); }
