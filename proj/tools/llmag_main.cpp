#include "llmag/io.hpp"

int main(int argc, char** argv) { return llmag::cli_main(argc, argv); }
