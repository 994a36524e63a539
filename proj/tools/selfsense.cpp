#include <selfsense/cli.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    return selfsense::run_cli(argc, argv, std::cout, std::cerr);
}
