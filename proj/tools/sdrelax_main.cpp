// sdrelax command line driver. Links only the C API of the shared library.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "sdrelax/sdrelax.h"

namespace {

// exit codes: 0 ok, 2 config error, 3 numerical failure
int exit_code_for(sdx_status status) {
    switch (status) {
        case SDX_OK: return 0;
        case SDX_ERR_NUMERIC: return 3;
        default: return 2;
    }
}

int run_command(const std::string& command, const std::string& config, const std::string& out_dir,
                long long seed) {
    char* manifest = nullptr;
    sdx_status status = sdx_run_config(config.c_str(), command.c_str(),
                                       out_dir.empty() ? nullptr : out_dir.c_str(), seed, &manifest);
    if (status != SDX_OK) {
        std::fprintf(stderr, "sdrelax: %s\n", sdx_last_error());
        return exit_code_for(status);
    }
    std::printf("%s\n", manifest);
    sdx_free_string(manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"relaxed energies of structured deformations: cell problems, blow-ups, "
                 "determining sequences and multilevel relaxation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;

    const char* run_commands[] = {"relax-bulk", "relax-surface", "dirichlet",
                                  "blowup",     "approx",        "multilevel", "validate"};
    for (const char* name : run_commands) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " config");
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--out", out_dir, "output directory (default $SDRELAX_OUT, then ./out)");
    }
    CLI::App* cat = app.add_subcommand("catalog", "list the built-in densities");

    CLI11_PARSE(app, argc, argv);

    if (cat->parsed()) {
        char* listing = nullptr;
        sdx_status status = sdx_catalog_json(&listing);
        if (status != SDX_OK) {
            std::fprintf(stderr, "sdrelax: %s\n", sdx_last_error());
            return exit_code_for(status);
        }
        std::printf("%s\n", listing);
        sdx_free_string(listing);
        return 0;
    }
    return run_command(app.get_subcommands().front()->get_name(), config_path, out_dir, seed);
}
