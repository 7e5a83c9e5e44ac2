#include <iostream>

#include <CLI11.hpp>

#include "cylab/lab.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Dirac operators on finite cylinders: spectra, invariants and checks"};
    std::string command;
    std::string config;
    std::string out;
    app.add_option("command", command, "spectrum | eta | zetadet | flow | verify | sweep")->required();
    app.add_option("--config", config, "LabConfig JSON file")->required();
    app.add_option("--out", out, "output directory (overrides output.dir)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cylab::exit_invalid_config;
    }
    std::optional<std::filesystem::path> out_dir;
    if (!out.empty()) out_dir = out;
    return cylab::run_lab(command, config, out_dir, std::cout, std::cerr);
}
