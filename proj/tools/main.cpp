#include "goursat/cli.h"

int main(int argc, char** argv) { return goursat::run_cli(argc, argv); }
