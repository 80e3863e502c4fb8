#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ibnr/dates.hpp"

namespace ibnr {

struct IncidentRecord {
    std::string id;
    Date breach_date;
    Date report_date;
};

/// Reporting-delay triangle of incident counts on a (origin month t) x
/// (delay d) grid. `present` is the evaluation time T: cell (t, d) is
/// observed exactly when its reporting month t + d - 1 falls inside the
/// observed history, i.e. t + d - 1 <= T - 1.
///
/// Cells may additionally be *known without being observed*: when a triangle
/// is masked back to an earlier present for backtesting, the hidden counts
/// stay in the grid as ground truth so evaluation never re-reads raw data.
/// Known cells always form a d-prefix of each row.
class ReportingTriangle {
public:
    /// counts[t-1][d-1]; use -1 for unknown cells.
    ReportingTriangle(YearMonth origin_start, int present, int max_delay,
                      std::vector<std::vector<long>> counts);

    int present() const { return present_; }
    int max_delay() const { return max_delay_; }
    int n_rows() const { return n_rows_; }
    YearMonth origin_start() const { return origin_start_; }
    YearMonth origin_month(int t) const { return origin_start_.plus_months(t - 1); }

    bool observed(int t, int d) const;
    bool known(int t, int d) const;

    /// Count of any known cell (observed or retained truth). Throws on unknown.
    long count(int t, int d) const;
    /// Count of an observed cell. Throws if the mask hides it.
    long observed_count(int t, int d) const;

    bool row_fully_observed(int t) const;
    long observed_partial_total(int t) const;

    /// Total over all D delays, available only when the whole row is known.
    std::optional<long> realized_total(int t) const;

    /// Rows with at least one observed and at least one unobserved cell;
    /// these are the nowcasting targets (t in T-D+1 .. T-1).
    std::vector<int> nowcast_window() const;

    /// Rows with at least one observed cell (the rows baselines can project).
    std::vector<int> projectable_rows() const;

    /// Sum of counts over observed cells.
    long observed_total() const;

    /// Re-masks the triangle to an earlier present time; hidden counts are
    /// retained as ground truth. t_cut must satisfy D + 1 <= t_cut <= present.
    ReportingTriangle masked_to(int t_cut) const;

private:
    YearMonth origin_start_;
    int present_;
    int max_delay_;
    int n_rows_;
    std::vector<long> cells_;        // n_rows * D, -1 == unknown
    std::vector<int> known_prefix_;  // per row, number of leading known cells

    long& cell(int t, int d) { return cells_[(t - 1) * static_cast<size_t>(max_delay_) + (d - 1)]; }
    long cell(int t, int d) const {
        return cells_[(t - 1) * static_cast<size_t>(max_delay_) + (d - 1)];
    }
    void check_indices(int t, int d) const;
};

struct OriginTotals {
    std::vector<std::optional<long>> full_total;  // n_t when the row is fully known
    std::vector<long> partial_observed_total;     // sum over observed cells
};

OriginTotals origin_totals(const ReportingTriangle& tri);

/// Bin raw incident records into a triangle. Duplicate ids are dropped
/// (first occurrence wins), records with delay beyond D or origin outside
/// 1..T-1 are discarded. Unparseable dates and report < breach are rejected
/// upstream when records are parsed; here the date ordering is re-checked.
ReportingTriangle ingest_incidents(const std::vector<IncidentRecord>& records,
                                   YearMonth origin_start, int present, int max_delay);

/// mask_to_present as a free function mirroring the member.
ReportingTriangle mask_to_present(const ReportingTriangle& tri, int t_cut);

/// Cumulative grid S_{t,k} = sum_{d<=k} n_{t,d} over each row's known prefix;
/// -1 where the prefix has ended.
std::vector<std::vector<long>> cumulate(const ReportingTriangle& tri);

} // namespace ibnr
