#include "breaklab/cli.hpp"

int main(int argc, char** argv) { return breaklab::cli::dispatch(argc, argv); }
