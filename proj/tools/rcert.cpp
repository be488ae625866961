#include "rcert/cli.hpp"

int main(int argc, char** argv) { return rcert::run(argc, argv); }
