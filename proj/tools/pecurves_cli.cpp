#include <iostream>

#include "CLI11.hpp"
#include "pecurves/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Prescribed-energy curves for concave-convex p-Laplacian problems"};
    app.require_subcommand(1);

    pec::CliOptions opts;
    std::string out;
    std::uint64_t seed = 0;
    double c = 0.0;

    auto common = [&](CLI::App* sub, bool need_config) {
        auto* cfg = sub->add_option("--config", opts.config_path, "experiment JSON file");
        if (need_config) cfg->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output.directory)");
        sub->add_option("--seed", seed, "seed (overrides run.seed)");
        sub->add_flag("--quiet", opts.quiet, "suppress the summary");
    };

    auto* solve = app.add_subcommand("solve", "one level and its critical point");
    common(solve, true);
    solve->add_option("--c", c, "energy level")->required();
    solve->add_option("--branch", opts.branch, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
    solve->add_option("--k", opts.k, "level index")->check(CLI::PositiveNumber);

    common(app.add_subcommand("trace", "thresholds and energy curves"), true);
    common(app.add_subcommand("verify", "run the invariant suite"), true);
    common(app.add_subcommand("thresholds", "c*, c** and the c0-minimizers"), true);
    common(app.add_subcommand("report", "re-render curves.csv and diagram.svg from report.json"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pec::kExitConfig;
    }

    for (auto* sub : app.get_subcommands()) {
        opts.command = sub->get_name();
        auto given = [sub](const char* name) {
            const CLI::Option* o = sub->get_option_no_throw(name);
            return o != nullptr && o->count() > 0;
        };
        if (given("--out")) opts.out = out;
        if (given("--seed")) opts.seed = seed;
        if (given("--c")) opts.c = c;
    }
    return pec::run_cli(opts, std::cout, std::cerr);
}
