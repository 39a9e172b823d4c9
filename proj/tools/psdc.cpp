#include "psdc_cli.hpp"

int main(int argc, char** argv) { return psdc_cli::run(argc, argv); }
