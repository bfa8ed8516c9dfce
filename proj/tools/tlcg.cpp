#include "tlcg/cli.hpp"

int main(int argc, char** argv) { return tlcg::cli::run(argc, argv); }
