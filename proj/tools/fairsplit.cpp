#include "fairsplit/cli.hpp"

int main(int argc, char** argv) { return fairsplit::run(argc, argv); }
