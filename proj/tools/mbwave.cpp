#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "mbwave/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Moving-boundary wave laboratory"};
    app.require_subcommand(1, 1);

    const std::map<std::string, std::string> help{
        {"region", "sample the observation region along both boundary curves"},
        {"identity-check", "verify the warped-geometry identities at random exterior points"},
        {"carleman-check", "pointwise Carleman identity and inequality margins"},
        {"simulate", "forward solve, energy history and multiplier identity"},
        {"observability-scan", "observability ratios against the window length"},
        {"hum", "boundary control by the Hilbert uniqueness method"},
        {"optimal-times", "one-sided optimal observation times"}};
    std::string config, out, grid;
    std::uint64_t seed = 0;
    for (const auto& name : mbwave::subcommands()) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("--config", config, "experiment JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--grid", grid, "grid override, NXxNT");
        sub->add_option("--seed", seed, "seed override");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    mbwave::RunOptions opt;
    const auto* sub = app.get_subcommands().front();
    if (!out.empty()) opt.out = out;
    if (sub->count("--seed")) opt.seed = seed;
    if (!grid.empty()) {
        try {
            opt.grid = mbwave::parse_grid(grid);
        } catch (const std::exception& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }
    return mbwave::dispatch(sub->get_name(), config, opt, std::cout, std::cerr);
}
