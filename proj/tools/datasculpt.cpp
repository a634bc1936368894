#include "datasculpt/cli.hpp"

int main(int argc, char** argv) { return datasculpt::cli::run(argc, argv); }
