#include "aers/cli.hpp"

int main(int argc, char** argv) { return aers::run(argc, argv); }
