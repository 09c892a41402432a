#include "app.hpp"

int main(int argc, char** argv) { return fnls::app::run_cli(argc, argv); }
