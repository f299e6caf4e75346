#include "mem0/harness.hpp"

int main(int argc, char** argv) { return mem0::cli(argc, argv); }
