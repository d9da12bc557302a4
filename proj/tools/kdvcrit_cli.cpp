#include "kdvcrit/cli.hpp"

int main(int argc, char** argv) { return kdv::cli::dispatch(argc, argv); }
