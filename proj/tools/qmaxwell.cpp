#include "qmaxwell/cli.hpp"

int main(int argc, char** argv) { return qmaxwell::run_cli(argc, argv); }
