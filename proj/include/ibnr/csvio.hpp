#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ibnr/baselines.hpp"
#include "ibnr/eval.hpp"
#include "ibnr/mcmc.hpp"
#include "ibnr/nowcast.hpp"
#include "ibnr/reserve.hpp"
#include "ibnr/synth.hpp"
#include "ibnr/triangle.hpp"

namespace ibnr {

// Incident CSV: header `id,breach_date,report_date`, ISO-8601 dates.
std::vector<IncidentRecord> read_incidents_csv(const std::string& path);

// Triangle CSV: header `t,d1..dD`, one row per origin month, unknown cells
// empty. `present` override re-masks on load; absent, the present time is
// inferred as the largest T consistent with the known cells.
ReportingTriangle read_triangle_csv(const std::string& path,
                                    std::optional<int> present = std::nullopt,
                                    YearMonth origin_start = {2018, 1});
void write_triangle_csv(const std::string& path, const ReportingTriangle& tri);

// Truth sidecar for synthetic triangles (JSON).
void write_truth_json(const std::string& path, const SynthTruth& truth);
SynthTruth read_truth_json(const std::string& path);

// Posterior draws CSV:
// chain,iter,alpha0,alpha1,alpha2,beta0,beta1,beta2,sigma_a0..sigma_b2
// Values are written with 17 significant digits so a reload is bit-exact.
void write_posterior_csv(const std::string& path, const PosteriorSamples& samples);
PosteriorSamples read_posterior_csv(const std::string& path);

// Summary CSV: param,mean,sd,q2.5,q50,q97.5
void write_summary_csv(const std::string& path, const std::vector<ParamSummary>& summary);

// Convergence CSV: param,psrf,ess rows plus a final mpsrf row.
void write_convergence_csv(const std::string& path, const ConvergenceReport& report);

// Nowcast CSV: t,origin_month,observed_partial,point,lo95,hi95,realized
void write_nowcast_csv(const std::string& path, const NowcastResult& result);
NowcastResult read_nowcast_csv(const std::string& path);

// Comparison table CSV (model,rmse,mae; 4 decimals) and aligned text table.
void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);
std::string comparison_text_table(const std::vector<ComparisonRow>& rows);

// Per-model point predictions: model,t,point,realized
struct ModelPoints {
    std::string model;
    std::vector<int> t;
    std::vector<double> point;
    std::vector<double> realized;
};
void write_points_csv(const std::string& path, const std::vector<ModelPoints>& models);

// Reserve CSV: month,estimated,paid,ibnr,ultimate,ibnr_change_pct
// (currency to 3 decimals, change rate to 2, "--" where undefined).
void write_reserve_csv(const std::string& path, const ReserveTable& table);

} // namespace ibnr
