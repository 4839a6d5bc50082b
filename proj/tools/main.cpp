#include "cli.hpp"

int main(int argc, char** argv) { return stentx::cli::run(argc, argv); }
