#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rqgas/commands.hpp"
#include "rqgas/config.hpp"
#include "rqgas/error.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) rqgas::fail(rqgas::ErrorKind::config, "cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) rqgas::fail(rqgas::ErrorKind::config, "cannot open output file '" + path + "'");
    out << text;
    if (!out) rqgas::fail(rqgas::ErrorKind::config, "failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equilibrium of interconverting ideal quantum gases"};
    std::string config_path;
    std::string command_name;
    std::string output_path;
    std::uint64_t seed = 0;
    bool describe = false;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--command", command_name, "solve | classical | enumerate | sample | compare | scan");
    app.add_option("--output", output_path, "output file (overrides output.path; default stdout)");
    auto* seed_opt = app.add_option("--seed", seed, "sampler seed (overrides sampler.seed)");
    app.add_flag("--describe-columns", describe, "print the output column and quantity reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (describe) {
        std::cout << rqgas::kColumnDescription;
        return 0;
    }

    try {
        if (config_path.empty()) rqgas::fail(rqgas::ErrorKind::usage, "--config is required");
        if (command_name.empty()) rqgas::fail(rqgas::ErrorKind::usage, "--command is required");
        const auto command = rqgas::parse_command(command_name);
        if (!command) rqgas::fail(rqgas::ErrorKind::usage, "unknown command '" + command_name + "'");

        auto cfg = rqgas::parse_config(read_file(config_path));
        if (*seed_opt) cfg.sampler.seed = seed;
        if (!output_path.empty()) cfg.output.path = output_path;

        const auto result = rqgas::run_command(*command, cfg);
        const auto text = rqgas::render(result, cfg.output);
        if (cfg.output.path.empty())
            std::cout << text;
        else
            write_file(cfg.output.path, text);
        if (!result.timeseries_csv.empty()) write_file(cfg.timeseries_path, result.timeseries_csv);
        return 0;
    } catch (const rqgas::Error& e) {
        std::cerr << "error: " << rqgas::to_string(e.kind()) << ": " << e.what() << "\n";
        return rqgas::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
