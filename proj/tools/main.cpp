#include "cli.hpp"

int main(int argc, char** argv) { return oadr::cli::run(argc, argv); }
