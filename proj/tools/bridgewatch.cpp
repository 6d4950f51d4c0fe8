#include <bridgewatch/cli.hpp>

int main(int argc, char** argv)
{
    return bridgewatch::cli::run(argc, argv);
}
