// Command-line front end: simulate, sweep, clip-study, calibrate-c, validate.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "stacksl/config.hpp"
#include "stacksl/errors.hpp"
#include "stacksl/harness.hpp"
#include "stacksl/io.hpp"

namespace fs = std::filesystem;
using namespace stacksl;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seeds;
    std::string out_dir = "out";
    std::size_t workers = 1;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "config file (key = value)");
    cmd->add_option("--seed", o.seed, "master seed (overrides 'seed')");
    cmd->add_option("--seeds", o.seeds, "number of seeded runs (overrides 'seeds')");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--workers", o.workers, "concurrent runs")->capture_default_str();
    cmd->add_option("--format", o.format, "csv | json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
}

ConfigGrid load_grid(const CommonOptions& o) {
    ConfigGrid grid = o.config_path.empty() ? ConfigGrid{} : read_config_file(o.config_path);
    const auto override_key = [&](const std::string& key, const std::string& value) {
        for (auto& [k, v] : grid)
            if (k == key) {
                v = {value};
                return;
            }
        grid.emplace_back(key, std::vector<std::string>{value});
    };
    if (o.seed) override_key("seed", std::to_string(*o.seed));
    if (o.seeds) override_key("seeds", std::to_string(*o.seeds));
    return grid;
}

std::ofstream open_out(const CommonOptions& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    const fs::path path = fs::path(o.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_results(const CommonOptions& o, const std::vector<ExperimentConfig>& grid,
                   const SweepResult& result, bool detail) {
    if (o.format == "json") {
        if (detail) open_out(o, "detail.json") << detail_json(grid, result) << '\n';
        open_out(o, "summary.json") << summary_json(result) << '\n';
    } else {
        if (detail) {
            auto out = open_out(o, "detail.csv");
            write_detail_csv(out, grid, result);
        }
        auto out = open_out(o, "summary.csv");
        write_summary_csv(out, result);
    }
    for (const auto& agg : result.aggregates) {
        const auto& m = agg.median;
        std::cout << "config " << agg.config_index << ": " << m.learner << " beta=" << m.beta
                  << " mode=" << m.mode << " median regret/T=" << m.regret_per_T
                  << " (se " << agg.std_error.regret_per_T << ") queries/T=" << m.queries_per_T << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Budget-aware Stackelberg supervised learning simulator"};
    app.require_subcommand(1);

    CommonOptions sim_o, sweep_o, clip_o, cal_o, val_o;
    auto* simulate = app.add_subcommand("simulate", "run one config over its seeds; full trace out");
    add_common(simulate, sim_o);

    auto* sweep_cmd = app.add_subcommand("sweep", "run a config grid (comma-separated values)");
    add_common(sweep_cmd, sweep_o);
    bool summary_only = false;
    sweep_cmd->add_flag("--summary-only", summary_only, "skip the per-round detail output");

    auto* clip = app.add_subcommand("clip-study", "loss statistics with and without clipping");
    add_common(clip, clip_o);

    auto* cal = app.add_subcommand("calibrate-c", "bisect the LLF scale c to a target query count");
    add_common(cal, cal_o);
    std::uint64_t target = 0;
    std::uint64_t warmup = 500;
    double kappa = 1.0;
    cal->add_option("--target", target, "target number of queries")->required();
    cal->add_option("--warmup", warmup, "warm-up rounds T0 for the initial bracket")->capture_default_str();
    cal->add_option("--kappa", kappa, "initial bracket multiplier")->capture_default_str();

    auto* val = app.add_subcommand("validate", "run the invariant suite");
    add_common(val, val_o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            const auto grid = std::vector{config_from_grid(load_grid(sim_o))};
            const auto result = sweep(grid, {sim_o.workers, true});
            write_results(sim_o, grid, result, true);
        } else if (sweep_cmd->parsed()) {
            const auto grid = expand_grid(load_grid(sweep_o));
            const auto result = sweep(grid, {sweep_o.workers, !summary_only});
            write_results(sweep_o, grid, result, !summary_only);
        } else if (clip->parsed()) {
            const auto cfg = config_from_grid(load_grid(clip_o));
            const auto res = clip_study(cfg, clip_o.workers);
            if (clip_o.format == "json") {
                open_out(clip_o, "clip_study.json")
                    << "{\"with_clip\": " << summary_row_json(res.with_clip)
                    << ",\n\"without_clip\": " << summary_row_json(res.without_clip)
                    << ",\n\"clip_fraction\": " << format_double(res.clip_fraction) << "}\n";
            } else {
                auto out = open_out(clip_o, "clip_study.csv");
                out << kSummaryHeader << '\n';
                write_summary_row(out, res.with_clip);
                write_summary_row(out, res.without_clip);
            }
            std::cout << "rho=" << format_double(cfg.rho) << " mean clipped="
                      << res.with_clip.mean_clipped_loss.value_or(0) << " max clipped="
                      << res.with_clip.max_clipped_loss.value_or(0) << " | no clip: mean raw="
                      << res.without_clip.mean_raw_loss.value_or(0) << " max raw="
                      << res.without_clip.max_raw_loss.value_or(0) << " | clipped rounds "
                      << res.clip_fraction * 100 << "%\n";
        } else if (cal->parsed()) {
            const auto cfg = config_from_grid(load_grid(cal_o));
            const auto res = calibrate_c(cfg, target, warmup, kappa);
            if (cal_o.format == "json") {
                std::cout << "{\"c\": " << format_double(res.c) << ", \"target\": " << res.target
                          << ", \"realized_queries\": " << res.realized_queries
                          << ", \"converged\": " << (res.converged ? "true" : "false")
                          << ", \"evaluations\": " << res.evaluations << "}\n";
            } else {
                std::cout << "c=" << format_double(res.c) << " realized_queries=" << res.realized_queries
                          << " target=" << res.target << " evaluations=" << res.evaluations << '\n';
            }
            if (!res.converged)
                std::cerr << "warning: bracket failure; realized queries are not within 10% of the "
                             "target, returning the closest c found\n";
        } else if (val->parsed()) {
            const auto cfg = config_from_grid(load_grid(val_o));
            ValidateOptions vo;
            vo.workers = val_o.workers;
            const auto report = validate_invariants(cfg, vo);
            if (val_o.format == "json") {
                std::cout << report_json(report) << '\n';
            } else {
                for (const auto& c : report.checks)
                    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  measured="
                              << format_double(c.measured) << " limit=" << format_double(c.limit)
                              << "  (" << c.detail << ")\n";
            }
            return report.all_passed() ? 0 : kExitInvariant;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}
