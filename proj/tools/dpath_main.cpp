#include <iostream>

#include "dpath/io/cli.hpp"

int main(int argc, char** argv) { return dpath::io::run(argc, argv, std::cout); }
