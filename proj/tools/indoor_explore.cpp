#include <explore/cli.hpp>

int main(int argc, char** argv) { return explore::cli_dispatch(std::vector<std::string>(argv + 1, argv + argc)); }
