#include "stacksl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "stacksl/errors.hpp"
#include "stacksl/model.hpp"

namespace stacksl {

RegretSeries compute_regret(const Trace& trace) {
    RegretSeries out;
    out.cumulative.reserve(trace.size());
    for (const auto& r : trace) {
        out.total += r.inst_regret;
        out.cumulative.push_back(out.total);
    }
    return out;
}

double loglog_slope(const std::vector<double>& cumulative, std::uint64_t t_lo, std::uint64_t t_hi) {
    expects(t_lo >= 1 && t_lo <= t_hi && t_hi <= cumulative.size(), "loglog_slope: bad range");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::uint64_t t = t_lo; t <= t_hi; ++t) {
        const double r = cumulative[t - 1];
        if (!(r > 0.0)) continue;
        const double x = std::log(static_cast<double>(t));
        const double y = std::log(r);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double elliptical_potential_sum(const Trace& trace) {
    double s = 0.0;
    for (const auto& r : trace) s += r.chosen_norm_sq;
    return s;
}

double elliptical_potential_bound(std::size_t d, std::uint64_t rounds, double feature_bound,
                                  double lambda_ridge) {
    const double dd = static_cast<double>(d);
    return 2.0 * dd *
           std::log1p(static_cast<double>(rounds) * feature_bound * feature_bound / (lambda_ridge * dd));
}

SummaryRow summarize(const ExperimentConfig& config, std::uint64_t seed, const Trace& trace,
                     double wall_time_ms) {
    SummaryRow row;
    row.learner = std::string(to_string(config.learner));
    row.beta = config.effective_budget_fraction();
    row.c = config.c;
    row.lambda_kl = config.lambda_kl;
    row.mode = std::string(to_string(config.mode));
    row.seed = std::to_string(seed);
    row.wall_time_ms = wall_time_ms;

    const double T = static_cast<double>(trace.size());
    double regret = 0.0;
    std::uint64_t queried = 0;
    double raw_sum = 0.0, clip_sum = 0.0;
    double raw_max = -std::numeric_limits<double>::infinity(), clip_max = raw_max;
    std::uint64_t losses = 0;
    for (const auto& r : trace) {
        regret += r.inst_regret;
        if (r.queried) ++queried;
        if (r.raw_loss) {
            ++losses;
            raw_sum += *r.raw_loss;
            clip_sum += *r.clipped_loss;
            raw_max = std::max(raw_max, *r.raw_loss);
            clip_max = std::max(clip_max, *r.clipped_loss);
        }
    }
    if (T > 0) {
        row.regret_per_T = regret / T;
        row.queries_per_T = static_cast<double>(queried) / T;
    }
    if (losses > 0) {
        const double n = static_cast<double>(losses);
        row.mean_raw_loss = raw_sum / n;
        row.max_raw_loss = raw_max;
        row.mean_clipped_loss = clip_sum / n;
        row.max_clipped_loss = clip_max;
    }
    return row;
}

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double std_error_of(const std::vector<double>& v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

template <typename Get>
std::vector<double> column(const std::vector<SummaryRow>& rows, Get&& get) {
    std::vector<double> out;
    for (const auto& r : rows)
        if (auto v = get(r)) out.push_back(*v);
    return out;
}

template <typename Exec>
void parallel_for(std::size_t n, std::size_t workers, Exec&& exec) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) exec(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) exec(i);
        });
    for (auto& t : pool) t.join();
}

struct TimedRun {
    Trace trace;
    double ms = 0.0;
};

TimedRun timed_episode(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    TimedRun out{run_episode(cfg, seed), 0.0};
    out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::uint64_t count_queries(const Trace& trace) {
    return static_cast<std::uint64_t>(
        std::count_if(trace.begin(), trace.end(), [](const RoundRecord& r) { return r.queried; }));
}

}  // namespace

AggregateRow aggregate(std::size_t config_index, const std::vector<SummaryRow>& rows) {
    expects(!rows.empty(), "aggregate: no rows");
    AggregateRow agg;
    agg.config_index = config_index;
    SummaryRow base = rows.front();
    base.seed = "aggregate";
    agg.median = base;
    agg.std_error = base;
    agg.std_error.seed = "aggregate_se";

    const auto fill = [&](auto member) {
        const auto vals = column(rows, [&](const SummaryRow& r) { return std::optional<double>(r.*member); });
        agg.median.*member = median_of(vals);
        agg.std_error.*member = std_error_of(vals);
    };
    const auto fill_opt = [&](auto member) {
        const auto vals = column(rows, [&](const SummaryRow& r) { return r.*member; });
        if (vals.empty()) {
            agg.median.*member = std::nullopt;
            agg.std_error.*member = std::nullopt;
        } else {
            agg.median.*member = median_of(vals);
            agg.std_error.*member = std_error_of(vals);
        }
    };
    fill(&SummaryRow::regret_per_T);
    fill(&SummaryRow::queries_per_T);
    fill(&SummaryRow::wall_time_ms);
    fill_opt(&SummaryRow::mean_raw_loss);
    fill_opt(&SummaryRow::max_raw_loss);
    fill_opt(&SummaryRow::mean_clipped_loss);
    fill_opt(&SummaryRow::max_clipped_loss);
    return agg;
}

SweepError::SweepError(std::size_t idx, std::uint64_t s, const std::string& what)
    : std::runtime_error("run failed (config index " + std::to_string(idx) + ", seed " +
                         std::to_string(s) + "): " + what),
      config_index(idx),
      seed(s) {}

SweepResult sweep(const std::vector<ExperimentConfig>& grid, const SweepOptions& options) {
    if (grid.empty()) throw ConfigError("sweep: empty config grid");
    for (const auto& c : grid) c.validate();

    SweepResult result;
    for (std::size_t ci = 0; ci < grid.size(); ++ci) {
        const auto seeds = grid[ci].seeds();
        for (std::size_t si = 0; si < seeds.size(); ++si) {
            RunResult run;
            run.config_index = ci;
            run.seed_index = si;
            run.run_id = result.runs.size();
            run.seed = seeds[si];
            result.runs.push_back(std::move(run));
        }
    }

    std::vector<std::exception_ptr> errors(result.runs.size());
    parallel_for(result.runs.size(), options.workers, [&](std::size_t i) {
        RunResult& run = result.runs[i];
        try {
            const ExperimentConfig& cfg = grid[run.config_index];
            TimedRun tr = timed_episode(cfg, run.seed);
            run.summary = summarize(cfg, run.seed, tr.trace, tr.ms);
            if (options.keep_traces) run.trace = std::move(tr.trace);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    });
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw SweepError(result.runs[i].config_index, result.runs[i].seed, e.what());
        }
    }

    for (std::size_t ci = 0; ci < grid.size(); ++ci) {
        std::vector<SummaryRow> rows;
        for (const auto& r : result.runs)
            if (r.config_index == ci) rows.push_back(r.summary);
        result.aggregates.push_back(aggregate(ci, rows));
    }
    return result;
}

ClipStudyResult clip_study(const ExperimentConfig& config, std::size_t workers) {
    if (config.mode != LearnerMode::SgdCe)
        throw ConfigError("clip-study requires learner.mode = sgd-ce (ridge-ucb has no CE loss)");
    config.validate();
    ExperimentConfig unclipped = config;
    unclipped.rho = std::numeric_limits<double>::infinity();

    const auto seeds = config.seeds();
    std::vector<TimedRun> clipped_runs(seeds.size()), raw_runs(seeds.size());
    parallel_for(2 * seeds.size(), workers, [&](std::size_t i) {
        const std::size_t s = i % seeds.size();
        if (i < seeds.size()) clipped_runs[s] = timed_episode(config, seeds[s]);
        else raw_runs[s] = timed_episode(unclipped, seeds[s]);
    });

    const auto pooled = [&](const ExperimentConfig& cfg, const std::vector<TimedRun>& runs) {
        Trace all;
        double ms = 0.0;
        for (const auto& r : runs) {
            all.insert(all.end(), r.trace.begin(), r.trace.end());
            ms += r.ms;
        }
        SummaryRow row = summarize(cfg, 0, all, ms);
        row.seed = "pooled";
        // Per-round normalization over the concatenated seeds.
        return std::pair{row, all};
    };

    ClipStudyResult out;
    auto [with_row, with_trace] = pooled(config, clipped_runs);
    auto [without_row, without_trace] = pooled(unclipped, raw_runs);
    (void)without_trace;
    out.with_clip = with_row;
    out.without_clip = without_row;
    std::uint64_t queried = 0;
    for (const auto& r : with_trace) {
        if (!r.raw_loss) continue;
        ++queried;
        if (*r.raw_loss >= config.rho) ++out.rounds_over_rho;
    }
    out.clip_fraction = queried ? static_cast<double>(out.rounds_over_rho) / static_cast<double>(queried) : 0.0;
    return out;
}

CalibrationResult calibrate_c(const ExperimentConfig& config, std::uint64_t target_queries,
                              std::uint64_t warmup_rounds, double kappa) {
    config.validate();
    if (target_queries < 1 || target_queries > config.horizon)
        throw ConfigError("calibrate-c: target must lie in [1, horizon]");
    ExperimentConfig base = config;
    base.learner = LearnerKind::LLF;
    const std::uint64_t seed = base.seeds().front();
    const double tol = 0.1 * static_cast<double>(target_queries);

    CalibrationResult res;
    res.target = target_queries;
    double best_gap = std::numeric_limits<double>::infinity();
    const auto evaluate = [&](double c) {
        ExperimentConfig cfg = base;
        cfg.c = c;
        const std::uint64_t q = count_queries(run_episode(cfg, seed));
        ++res.evaluations;
        const double gap = std::abs(static_cast<double>(q) - static_cast<double>(target_queries));
        if (gap < best_gap) {
            best_gap = gap;
            res.c = c;
            res.realized_queries = q;
        }
        return q;
    };
    const auto hit = [&] { return best_gap <= tol; };

    // A zero threshold queries on every round while budget remains.
    std::uint64_t q_lo = evaluate(0.0);
    if (hit()) {
        res.converged = true;
        return res;
    }
    {
        ExperimentConfig warm = base;
        warm.c = 0.0;
        warm.horizon = std::max<std::uint64_t>(1, std::min(warmup_rounds, config.horizon));
        std::vector<double> widths;
        for (const auto& r : run_episode(warm, seed)) widths.push_back(r.width);
        res.warmup_median_width = median_of(widths);
    }
    if (static_cast<double>(q_lo) < static_cast<double>(target_queries) - tol) return res;

    constexpr int kMaxIterations = 30;
    double lo = 0.0;
    double hi = std::max(kappa * res.warmup_median_width, 1e-12);
    std::uint64_t q_hi = evaluate(hi);
    if (hit()) {
        res.converged = true;
        return res;
    }
    while (static_cast<double>(q_hi) > target_queries + tol && res.evaluations < kMaxIterations) {
        lo = hi;
        q_lo = q_hi;
        hi *= 2.0;
        q_hi = evaluate(hi);
        if (hit()) {
            res.converged = true;
            return res;
        }
    }
    while (res.evaluations < kMaxIterations) {
        const double mid = 0.5 * (lo + hi);
        const std::uint64_t q = evaluate(mid);
        if (hit()) {
            res.converged = true;
            return res;
        }
        if (q > target_queries) lo = mid;
        else hi = mid;
    }
    return res;
}

bool InvariantReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const InvariantCheck& c) { return c.passed; });
}

double gradient_check(std::uint64_t seed, std::size_t instances, double step) {
    Rng rng(derive_seed(seed, 0x67726164));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    constexpr std::size_t d = 5, n = 4;
    double worst = 0.0;
    for (std::size_t it = 0; it < instances; ++it) {
        CandidateSet cands;
        cands.features.resize(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            Vector v(d);
            for (std::size_t j = 0; j < d; ++j) v(static_cast<Eigen::Index>(j)) = normal(rng);
            cands.features.row(static_cast<Eigen::Index>(i)) = (v / v.norm()).transpose();
        }
        Params theta = Params::zeros(d), ref = Params::zeros(d);
        for (std::size_t j = 0; j < d; ++j) {
            theta.theta(static_cast<Eigen::Index>(j)) = normal(rng);
            ref.theta(static_cast<Eigen::Index>(j)) = normal(rng);
        }
        const auto star = static_cast<std::size_t>(unif(rng) * n) % n;
        const double lambda_kl = unif(rng);
        const double raw = ce_loss(theta, cands, star);
        // Half the instances sit on the clip plateau, half inside; never near the kink.
        double rho = unif(rng) < 0.5 ? raw * (0.5 + 0.4 * unif(rng)) : raw * (1.1 + unif(rng));
        if (std::abs(rho - raw) < 1e-3) rho = raw + 1.0;

        const auto objective = [&](const Params& p) {
            return clip_loss(ce_loss(p, cands, star), rho) + lambda_kl * kl_divergence(p, ref, cands);
        };
        const Vector g = loss_gradient(theta, ref, cands, star, lambda_kl, rho);
        Vector fd(d);
        for (std::size_t j = 0; j < d; ++j) {
            Params plus = theta, minus = theta;
            plus.theta(static_cast<Eigen::Index>(j)) += step;
            minus.theta(static_cast<Eigen::Index>(j)) -= step;
            fd(static_cast<Eigen::Index>(j)) = (objective(plus) - objective(minus)) / (2.0 * step);
        }
        const double err = (g - fd).norm() / std::max(fd.norm(), 1e-6);
        worst = std::max(worst, err);
    }
    return worst;
}

InvariantReport validate_invariants(const ExperimentConfig& config, const ValidateOptions& options) {
    config.validate();
    InvariantReport report;
    const auto add = [&](std::string name, bool ok, double measured, double limit, std::string detail) {
        report.checks.push_back({std::move(name), ok, measured, limit, std::move(detail)});
    };

    // Episodes of the configured learner, with the inverse audited each round.
    ExperimentConfig audited = config;
    audited.audit_inverse = true;
    const auto seeds = audited.seeds();
    std::vector<Trace> traces(seeds.size());
    parallel_for(seeds.size(), options.workers,
                 [&](std::size_t i) { traces[i] = run_episode(audited, seeds[i]); });

    {
        const std::uint64_t B = audited.budget();
        bool ok = true;
        double worst = 0.0;
        for (const auto& tr : traces) {
            const std::uint64_t q = count_queries(tr);
            const std::uint64_t final_q = tr.empty() ? 0 : tr.back().queries;
            ok = ok && q <= B && final_q == q;
            worst = std::max(worst, static_cast<double>(q));
        }
        add("budget_compliance", ok, worst, static_cast<double>(B), "max queried rounds vs B = floor(beta*T)");
    }
    {
        double worst = 0.0;
        for (const auto& tr : traces)
            for (const auto& r : tr) worst = std::max(worst, r.inverse_residual);
        add("inverse_fidelity", worst <= 1e-6, worst, 1e-6, "max |V*V_inv - I| over all rounds");
    }
    {
        double worst_ratio = 0.0;
        bool ok = true;
        for (const auto& tr : traces) {
            const double bound =
                elliptical_potential_bound(config.dim, tr.size(), config.feature_bound, config.lambda_ridge);
            const double sum = elliptical_potential_sum(tr);
            ok = ok && sum <= bound;
            if (bound > 0) worst_ratio = std::max(worst_ratio, sum / bound);
        }
        add("elliptical_potential", ok, worst_ratio, 1.0, "max over episodes of sum ||phi||^2_{V^-1} / bound");
    }
    {
        double eps_ratio = 0.0;
        bool skip_ok = true;
        bool eps_ok = true;
        double worst_skip = -std::numeric_limits<double>::infinity();
        for (const auto& tr : traces) {
            double eps_sum = 0.0;
            std::uint64_t q = 0;
            for (const auto& r : tr) {
                if (r.queried) {
                    eps_sum += r.threshold;
                    ++q;
                } else if (config.learner == LearnerKind::LLF && r.uncovered == 0 &&
                           r.width <= r.threshold) {
                    worst_skip = std::max(worst_skip, r.inst_regret - r.threshold);
                    skip_ok = skip_ok && r.inst_regret <= r.threshold + 1e-12;
                }
            }
            if (config.learner == LearnerKind::LLF) {
                const double bound = 2.0 * config.c * std::sqrt(static_cast<double>(q));
                eps_ok = eps_ok && eps_sum <= bound + 1e-9;
                if (bound > 0) eps_ratio = std::max(eps_ratio, eps_sum / bound);
            }
        }
        add("skip_round_safety", skip_ok, std::isfinite(worst_skip) ? worst_skip : 0.0, 0.0,
            "max (inst_regret - epsilon_t) on covered rounds skipped by the gate");
        add("threshold_sum", eps_ok, eps_ratio, 1.0, "sum of epsilon over queried rounds / (2 c sqrt(q))");
    }
    {
        ExperimentConfig cov = config;
        cov.learner = LearnerKind::StackSL;
        cov.mode = LearnerMode::RidgeUcb;
        cov.horizon = std::min(config.horizon, options.coverage_horizon);
        cov.num_seeds = options.coverage_seeds;
        const auto cov_seeds = cov.seeds();
        std::vector<std::pair<std::uint64_t, std::uint64_t>> counts(cov_seeds.size());
        parallel_for(cov_seeds.size(), options.workers, [&](std::size_t i) {
            for (const auto& r : run_episode(cov, cov_seeds[i])) {
                counts[i].first += r.uncovered;
                counts[i].second += r.set_size;
            }
        });
        std::uint64_t miss = 0, total = 0;
        for (const auto& [m, t] : counts) {
            miss += m;
            total += t;
        }
        const double rate = total ? static_cast<double>(miss) / static_cast<double>(total) : 0.0;
        const double limit = config.delta + 0.02;
        add("coverage", rate <= limit, rate, limit,
            "fraction of (round, candidate) pairs outside [LCB, UCB], full-feedback ridge-ucb");
    }
    {
        bool ok = true;
        for (LearnerMode mode : {LearnerMode::RidgeUcb, LearnerMode::SgdCe}) {
            ExperimentConfig full = config;
            full.mode = mode;
            full.horizon = std::min(config.horizon, options.reduction_horizon);
            full.inverted_gate = false;
            full.corrupt_inverse = 0.0;
            full.learner = LearnerKind::StackSL;
            ExperimentConfig llf = full;
            llf.learner = LearnerKind::LLF;
            llf.c = 0.0;
            llf.budget_fraction = 1.0;
            const std::uint64_t seed = config.seeds().front();
            ok = ok && run_episode(full, seed) == run_episode(llf, seed);
        }
        add("reduction_equivalence", ok, ok ? 0.0 : 1.0, 0.0,
            "LLF with c=0, B=T reproduces StackSL bit-for-bit (both modes)");
    }
    {
        const double err = gradient_check(config.master_seed, options.gradient_instances);
        add("gradient_finite_difference", err <= 1e-4, err, 1e-4,
            "max relative error vs central differences, step 1e-5");
    }
    {
        ExperimentConfig sgd = config;
        sgd.mode = LearnerMode::SgdCe;
        sgd.horizon = std::min(config.horizon, options.reduction_horizon);
        double worst = 0.0;
        bool ok = true;
        for (const auto& r : run_episode(sgd, sgd.seeds().front())) {
            if (!r.clipped_loss) continue;
            ok = ok && *r.clipped_loss >= 0.0 && *r.clipped_loss <= sgd.rho;
            worst = std::max(worst, *r.clipped_loss);
        }
        add("clip_range", ok, worst, sgd.rho, "max clipped loss in sgd-ce mode");
    }
    return report;
}

}  // namespace stacksl
