#include "cli.hpp"

int main(int argc, char** argv) { return susyscat::cli::run(argc, argv); }
