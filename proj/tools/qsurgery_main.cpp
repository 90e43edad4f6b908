#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"code-surgery logical measurement toolkit"};
    app.require_subcommand(1);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }
    return 0;
}
