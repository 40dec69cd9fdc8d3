#include "stacksl/io.hpp"

#include <json.hpp>
#include <ostream>

namespace stacksl {

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json opt_json(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json row_to_json(const SummaryRow& r) {
    return {{"learner", r.learner},
            {"beta", r.beta},
            {"c", r.c},
            {"lambda_kl", r.lambda_kl},
            {"mode", r.mode},
            {"seed", r.seed},
            {"regret_per_T", r.regret_per_T},
            {"queries_per_T", r.queries_per_T},
            {"mean_raw_loss", opt_json(r.mean_raw_loss)},
            {"max_raw_loss", opt_json(r.max_raw_loss)},
            {"mean_clipped_loss", opt_json(r.mean_clipped_loss)},
            {"max_clipped_loss", opt_json(r.max_clipped_loss)},
            {"wall_time_ms", r.wall_time_ms}};
}

}  // namespace

void write_detail_rows(std::ostream& out, std::uint64_t run_id, std::uint64_t seed,
                       LearnerKind learner, const Trace& trace) {
    const std::string_view name = to_string(learner);
    double cum = 0.0;
    for (const auto& r : trace) {
        cum += r.inst_regret;
        out << run_id << ',' << seed << ',' << r.t << ',' << name << ',' << (r.queried ? 1 : 0) << ','
            << r.queries << ',' << r.chosen << ',' << r.optimal << ',' << format_double(r.width) << ','
            << format_double(r.threshold) << ',' << opt(r.raw_loss) << ',' << opt(r.clipped_loss) << ','
            << format_double(r.inst_regret) << ',' << format_double(cum) << '\n';
    }
}

void write_summary_row(std::ostream& out, const SummaryRow& r) {
    out << r.learner << ',' << format_double(r.beta) << ',' << format_double(r.c) << ','
        << format_double(r.lambda_kl) << ',' << r.mode << ',' << r.seed << ','
        << format_double(r.regret_per_T) << ',' << format_double(r.queries_per_T) << ','
        << opt(r.mean_raw_loss) << ',' << opt(r.max_raw_loss) << ',' << opt(r.mean_clipped_loss) << ','
        << opt(r.max_clipped_loss) << ',' << format_double(r.wall_time_ms) << '\n';
}

void write_detail_csv(std::ostream& out, const std::vector<ExperimentConfig>& grid,
                      const SweepResult& result) {
    out << kDetailHeader << '\n';
    for (const auto& run : result.runs)
        write_detail_rows(out, run.run_id, run.seed, grid[run.config_index].learner, run.trace);
}

void write_summary_csv(std::ostream& out, const SweepResult& result) {
    out << kSummaryHeader << '\n';
    for (const auto& run : result.runs) write_summary_row(out, run.summary);
    for (const auto& agg : result.aggregates) {
        write_summary_row(out, agg.median);
        write_summary_row(out, agg.std_error);
    }
}

std::string detail_json(const std::vector<ExperimentConfig>& grid, const SweepResult& result) {
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& run : result.runs) {
        nlohmann::json rounds = nlohmann::json::array();
        double cum = 0.0;
        for (const auto& r : run.trace) {
            cum += r.inst_regret;
            rounds.push_back({{"t", r.t},
                              {"queried", r.queried},
                              {"q", r.queries},
                              {"chosen", r.chosen},
                              {"optimal", r.optimal},
                              {"delta", r.width},
                              {"epsilon", r.threshold},
                              {"raw_loss", opt_json(r.raw_loss)},
                              {"clipped_loss", opt_json(r.clipped_loss)},
                              {"inst_regret", r.inst_regret},
                              {"cum_regret", cum}});
        }
        runs.push_back({{"run_id", run.run_id},
                        {"seed", run.seed},
                        {"learner", std::string(to_string(grid[run.config_index].learner))},
                        {"rounds", std::move(rounds)}});
    }
    return runs.dump(1);
}

std::string summary_json(const SweepResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& run : result.runs) rows.push_back(row_to_json(run.summary));
    nlohmann::json aggs = nlohmann::json::array();
    for (const auto& a : result.aggregates)
        aggs.push_back({{"config_index", a.config_index},
                        {"median", row_to_json(a.median)},
                        {"std_error", row_to_json(a.std_error)}});
    return nlohmann::json{{"runs", rows}, {"aggregates", aggs}}.dump(1);
}

std::string summary_row_json(const SummaryRow& row) { return row_to_json(row).dump(1); }

std::string report_json(const InvariantReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks)
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"measured", c.measured},
                          {"limit", c.limit},
                          {"detail", c.detail}});
    return nlohmann::json{{"passed", report.all_passed()}, {"checks", checks}}.dump(1);
}

}  // namespace stacksl
