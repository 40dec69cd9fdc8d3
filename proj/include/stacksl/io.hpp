#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "stacksl/harness.hpp"

namespace stacksl {

inline constexpr const char* kDetailHeader =
    "run_id,seed,t,learner,queried,q,chosen,optimal,delta,epsilon,raw_loss,clipped_loss,"
    "inst_regret,cum_regret";
inline constexpr const char* kSummaryHeader =
    "learner,beta,c,lambda_kl,mode,seed,regret_per_T,queries_per_T,mean_raw_loss,max_raw_loss,"
    "mean_clipped_loss,max_clipped_loss,wall_time_ms";

// Rows of one run; no header. Absent losses are written as empty fields.
void write_detail_rows(std::ostream& out, std::uint64_t run_id, std::uint64_t seed,
                       LearnerKind learner, const Trace& trace);
void write_summary_row(std::ostream& out, const SummaryRow& row);

void write_detail_csv(std::ostream& out, const std::vector<ExperimentConfig>& grid,
                      const SweepResult& result);
// Per-run rows, then each config's aggregate and aggregate_se rows.
void write_summary_csv(std::ostream& out, const SweepResult& result);

std::string detail_json(const std::vector<ExperimentConfig>& grid, const SweepResult& result);
std::string summary_json(const SweepResult& result);
std::string summary_row_json(const SummaryRow& row);
std::string report_json(const InvariantReport& report);

}  // namespace stacksl
