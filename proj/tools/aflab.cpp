// Command line front end. Every subcommand builds a RunConfig (optionally
// seeded from --config JSON, with flags overriding) and hands it to run().
// Exit codes: 0 all suites passed, 1 failures recorded, 2 bad configuration.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aflab/radial_metric.hpp"
#include "aflab/suites.hpp"

namespace {

aflab::RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw aflab::ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw aflab::ConfigError(std::string{"config is not valid JSON: "} + e.what());
    }
    return aflab::RunConfig::from_json(j);
}

// Accepts "lo..hi" or a single seed.
void parse_seeds(const std::string& spec, aflab::RunConfig& cfg) {
    const auto dots = spec.find("..");
    try {
        if (dots == std::string::npos) {
            cfg.seed_lo = cfg.seed_hi = std::stoull(spec);
        } else {
            cfg.seed_lo = std::stoull(spec.substr(0, dots));
            cfg.seed_hi = std::stoull(spec.substr(dots + 2));
        }
    } catch (const std::logic_error&) {
        throw aflab::ConfigError("bad seed range: " + spec);
    }
    if (cfg.seed_hi < cfg.seed_lo)
        throw aflab::ConfigError("seed range is empty: " + spec);
}

std::vector<double> parse_numbers(const std::string& spec, std::size_t expect,
                                  const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    try {
        while (pos <= spec.size()) {
            auto comma = spec.find(',', pos);
            if (comma == std::string::npos) comma = spec.size();
            out.push_back(std::stod(spec.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    } catch (const std::logic_error&) {
        throw aflab::ConfigError(std::string{"bad "} + what + ": " + spec);
    }
    if (expect != 0 && out.size() != expect)
        throw aflab::ConfigError(std::string{"expected "} + std::to_string(expect) +
                                 " comma-separated values for " + what);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymptotically flat laboratory: radial and 3d harmonic suites"};
    app.require_subcommand(1);

    std::string config_path, out_dir, t_spec, domain, seeds_spec;
    std::string metric_file, schwarzschild_spec, two_ended_spec, flat_spec;
    std::string shell_specs_joined, snapshot;
    std::vector<std::string> shell_specs;
    double tol_mono = -1.0, tol_bound = -1.0;
    long long seed_metric = -1;
    int threads = 0;
    long long n3 = 0;
    double box3 = -1.0, r0_3 = -1.0, m3 = std::numeric_limits<double>::quiet_NaN();
    bool flat3d = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration; flags override it");
        sub->add_option("--out", out_dir, "output directory (default $AFLAB_OUT or aflab-out)");
        sub->add_option("--threads", threads, "worker threads for fuzz campaigns");
        sub->add_option("--tol-mono", tol_mono, "monotonicity tolerance");
        sub->add_option("--tol-bound", tol_bound, "upper-bound tolerance");
        sub->add_option("--t", t_spec, "level grid, lo:hi:step or comma list");
    };

    auto* verify = app.add_subcommand("verify-schwarzschild",
                                      "closed-form oracle identities on model exteriors");
    add_common(verify);

    auto* sweep = app.add_subcommand("sweep", "solve one metric and emit curve artifacts");
    add_common(sweep);
    sweep->add_option("--metric-file", metric_file, "metric description JSON file");
    sweep->add_option("--schwarzschild", schwarzschild_spec, "exterior model: m,r0");
    sweep->add_option("--two-ended", two_ended_spec, "two-ended model: m");
    sweep->add_option("--flat", flat_spec, "flat exterior: r0");
    sweep->add_option("--seed", seed_metric, "draw the metric from the admissible generator");
    sweep->add_option("--domain", domain, "generated-metric domain: exterior | punctured");

    auto* fuzz = app.add_subcommand("fuzz", "seeded campaign over admissible metrics");
    add_common(fuzz);
    fuzz->add_option("--seeds", seeds_spec, "seed range lo..hi (or one seed)");
    fuzz->add_option("--domain", domain, "exterior | punctured");

    auto* solve3d = app.add_subcommand("solve3d", "3d conformal solve plus level sweep");
    add_common(solve3d);
    solve3d->add_option("--m", m3, "schwarzschild mass (default 1)");
    solve3d->add_option("--r0", r0_3, "excised ball radius");
    solve3d->add_option("--n", n3, "grid nodes per axis");
    solve3d->add_option("--box", box3, "half-width of the box (default 16 r0)");
    solve3d->add_option("--shell", shell_specs, "off-center shell w,x,y,z,mollify (repeatable)");
    solve3d->add_flag("--flat3d", flat3d, "flat conformal factor");
    solve3d->add_option("--snapshot", snapshot, "load this field snapshot instead of solving");

    auto* report = app.add_subcommand("report", "fold existing result files into a summary");
    report->add_option("--out", out_dir, "directory holding the result files");

    CLI11_PARSE(app, argc, argv);

    try {
        aflab::RunConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        cfg.command = app.get_subcommands().front()->get_name();
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!t_spec.empty()) cfg.t_spec = t_spec;
        if (!domain.empty()) cfg.domain = domain;
        if (threads > 0) cfg.threads = threads;
        if (tol_mono >= 0.0) cfg.tol_mono = tol_mono;
        if (tol_bound >= 0.0) cfg.tol_bound = tol_bound;
        if (!seeds_spec.empty()) parse_seeds(seeds_spec, cfg);

        if (cfg.command == "sweep") {
            using aflab::DomainKind;
            const auto dk = cfg.domain == "punctured" ? DomainKind::PuncturedSpace
                                                      : DomainKind::ExteriorOfSphere;
            if (!metric_file.empty()) {
                std::ifstream in(metric_file);
                if (!in)
                    throw aflab::ConfigError("cannot open metric file " + metric_file);
                nlohmann::json j;
                in >> j;
                cfg.metric = j;
            } else if (!schwarzschild_spec.empty()) {
                const auto v = parse_numbers(schwarzschild_spec, 2, "--schwarzschild");
                cfg.metric = aflab::RadialConformalMetric::schwarzschild(
                                 v[0], DomainKind::ExteriorOfSphere, v[1])
                                 .to_json();
            } else if (!two_ended_spec.empty()) {
                const auto v = parse_numbers(two_ended_spec, 1, "--two-ended");
                cfg.metric = aflab::RadialConformalMetric::schwarzschild(
                                 v[0], DomainKind::PuncturedSpace, 0.0)
                                 .to_json();
            } else if (!flat_spec.empty()) {
                const auto v = parse_numbers(flat_spec, 1, "--flat");
                cfg.metric =
                    aflab::RadialConformalMetric::flat(DomainKind::ExteriorOfSphere, v[0])
                        .to_json();
            } else if (seed_metric >= 0) {
                cfg.metric = aflab::random_admissible(static_cast<std::uint64_t>(seed_metric),
                                                      3, 2.0, {0.5, 8.0}, dk)
                                 .to_json();
            }
        }

        if (cfg.command == "solve3d") {
            if (n3 > 0) cfg.grid3d.n = n3;
            if (box3 > 0.0) cfg.grid3d.box = box3;
            if (r0_3 > 0.0) cfg.grid3d.r0 = r0_3;
            if (!snapshot.empty()) cfg.snapshot = snapshot;
            if (!shell_specs.empty()) {
                nlohmann::json shells = nlohmann::json::array();
                for (const auto& s : shell_specs)
                    shells.push_back(parse_numbers(s, 5, "--shell"));
                cfg.metric3d = {{"kind", "shells"}, {"shells", shells}};
            } else if (flat3d) {
                cfg.metric3d = {{"kind", "flat"}};
            } else if (std::isfinite(m3)) {
                cfg.metric3d = {{"kind", "schwarzschild"}, {"m", m3}};
            }
        }

        return aflab::run(cfg);
    } catch (const aflab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const aflab::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
