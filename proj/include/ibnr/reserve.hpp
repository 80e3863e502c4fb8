#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibnr/nowcast.hpp"

namespace ibnr {

struct CostModel {
    double cost_per_incident = 4.35; // millions per incident

    explicit CostModel(double cost = 4.35);
};

struct ReserveRow {
    std::string month; // origin month label
    double estimated = 0.0;
    double paid = 0.0;
    double ibnr = 0.0; // estimated - paid, by construction
    std::optional<double> ultimate;
    std::optional<double> change_pct; // IBNR change rate vs previous month
};

struct ReserveTable {
    std::vector<ReserveRow> rows;
    ReserveRow totals;
};

/// Monetary reserve table from per-month nowcasts: paid = observed * cost,
/// estimated = point * cost, ibnr = estimated - paid, ultimate from realized
/// truth when present. The nowcast rows must cover a contiguous window.
ReserveTable reserve_table(const NowcastResult& nowcasts, const CostModel& cost);

/// Percentage change of the IBNR column, 100*(x_t - x_{t-1})/x_{t-1};
/// nullopt on the first row and wherever the previous IBNR is zero.
/// Needs at least two rows.
std::vector<std::optional<double>> ibnr_change_rate(std::span<const ReserveRow> rows);

} // namespace ibnr
