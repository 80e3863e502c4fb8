#include "ibnr/triangle.hpp"

#include <algorithm>
#include <unordered_set>

#include "ibnr/common.hpp"

namespace ibnr {

ReportingTriangle::ReportingTriangle(YearMonth origin_start, int present, int max_delay,
                                     std::vector<std::vector<long>> counts)
    : origin_start_(origin_start),
      present_(present),
      max_delay_(max_delay),
      n_rows_(static_cast<int>(counts.size())) {
    if (max_delay_ < 1) throw InputError("triangle needs max delay D >= 1");
    if (present_ < 1) throw InputError("triangle present time must be >= 1");
    cells_.assign(static_cast<size_t>(n_rows_) * max_delay_, -1);
    known_prefix_.assign(n_rows_, 0);

    for (int t = 1; t <= n_rows_; ++t) {
        const auto& row = counts[t - 1];
        if (static_cast<int>(row.size()) != max_delay_) {
            throw InputError("triangle row " + std::to_string(t) + " has " +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(max_delay_));
        }
        bool ended = false;
        for (int d = 1; d <= max_delay_; ++d) {
            const long v = row[d - 1];
            if (v < 0) {
                ended = true;
                continue;
            }
            if (ended) {
                throw InputError("triangle row " + std::to_string(t) +
                                 ": known cells must form a prefix of delays");
            }
            cell(t, d) = v;
            known_prefix_[t - 1] = d;
        }
        // every observed cell must carry a value
        for (int d = 1; d <= max_delay_; ++d) {
            if (t + d - 1 <= present_ - 1 && d > known_prefix_[t - 1]) {
                throw InputError("triangle row " + std::to_string(t) + " delay " +
                                 std::to_string(d) + " is observed at T=" +
                                 std::to_string(present_) + " but has no value");
            }
        }
    }
}

void ReportingTriangle::check_indices(int t, int d) const {
    if (t < 1 || t > n_rows_ || d < 1 || d > max_delay_) {
        throw InputError("triangle index (t=" + std::to_string(t) + ", d=" + std::to_string(d) +
                         ") out of range");
    }
}

bool ReportingTriangle::observed(int t, int d) const {
    check_indices(t, d);
    return t + d - 1 <= present_ - 1;
}

bool ReportingTriangle::known(int t, int d) const {
    check_indices(t, d);
    return d <= known_prefix_[t - 1];
}

long ReportingTriangle::count(int t, int d) const {
    if (!known(t, d)) {
        throw InputError("triangle cell (t=" + std::to_string(t) + ", d=" + std::to_string(d) +
                         ") is unknown");
    }
    return cell(t, d);
}

long ReportingTriangle::observed_count(int t, int d) const {
    if (!observed(t, d)) {
        throw InputError("triangle cell (t=" + std::to_string(t) + ", d=" + std::to_string(d) +
                         ") is not observed at T=" + std::to_string(present_));
    }
    return cell(t, d);
}

bool ReportingTriangle::row_fully_observed(int t) const {
    return observed(t, max_delay_);
}

long ReportingTriangle::observed_partial_total(int t) const {
    long s = 0;
    for (int d = 1; d <= max_delay_ && t + d - 1 <= present_ - 1; ++d) s += cell(t, d);
    return s;
}

std::optional<long> ReportingTriangle::realized_total(int t) const {
    check_indices(t, 1);
    if (known_prefix_[t - 1] < max_delay_) return std::nullopt;
    long s = 0;
    for (int d = 1; d <= max_delay_; ++d) s += cell(t, d);
    return s;
}

std::vector<int> ReportingTriangle::nowcast_window() const {
    std::vector<int> rows;
    const int lo = std::max(1, present_ - max_delay_ + 1);
    const int hi = std::min(n_rows_, present_ - 1);
    for (int t = lo; t <= hi; ++t) rows.push_back(t);
    return rows;
}

std::vector<int> ReportingTriangle::projectable_rows() const {
    std::vector<int> rows;
    for (int t = 1; t <= std::min(n_rows_, present_ - 1); ++t) rows.push_back(t);
    return rows;
}

long ReportingTriangle::observed_total() const {
    long s = 0;
    for (int t = 1; t <= n_rows_; ++t) {
        for (int d = 1; d <= max_delay_ && t + d - 1 <= present_ - 1; ++d) s += cell(t, d);
    }
    return s;
}

ReportingTriangle ReportingTriangle::masked_to(int t_cut) const {
    if (t_cut > present_) {
        throw InputError("mask_to_present: T_cut=" + std::to_string(t_cut) +
                         " exceeds current present T=" + std::to_string(present_));
    }
    if (t_cut < max_delay_ + 1) {
        throw InputError("mask_to_present: T_cut=" + std::to_string(t_cut) +
                         " leaves no fully observed row (need T_cut >= D+1=" +
                         std::to_string(max_delay_ + 1) + ")");
    }
    ReportingTriangle out = *this;
    out.present_ = t_cut;
    return out;
}

OriginTotals origin_totals(const ReportingTriangle& tri) {
    OriginTotals ot;
    ot.full_total.resize(tri.n_rows());
    ot.partial_observed_total.resize(tri.n_rows());
    for (int t = 1; t <= tri.n_rows(); ++t) {
        ot.full_total[t - 1] = tri.realized_total(t);
        ot.partial_observed_total[t - 1] =
            t <= tri.present() - 1 ? tri.observed_partial_total(t) : 0;
    }
    return ot;
}

ReportingTriangle ingest_incidents(const std::vector<IncidentRecord>& records,
                                   YearMonth origin_start, int present, int max_delay) {
    if (records.empty()) throw InputError("ingest: no incident records");
    if (max_delay < 1 || present < max_delay) {
        throw InputError("ingest: need T >= D >= 1 (got T=" + std::to_string(present) +
                         ", D=" + std::to_string(max_delay) + ")");
    }

    const int n_rows = present - 1;
    std::unordered_set<std::string> seen;
    seen.reserve(records.size());

    // The file is complete through its latest report month: cells whose
    // reporting month lies beyond both the mask and that last report stay
    // unknown rather than being treated as true zeros.
    int last_report = present - 1;
    struct Binned {
        int t, d;
    };
    std::vector<Binned> kept;
    kept.reserve(records.size());

    for (const auto& rec : records) {
        if (rec.report_date < rec.breach_date) {
            throw InputError("record '" + rec.id + "': report_date " + rec.report_date.str() +
                             " precedes breach_date " + rec.breach_date.str());
        }
        if (!seen.insert(rec.id).second) continue; // duplicate id
        const int t = month_offset(origin_start, rec.breach_date.year_month());
        const int d = month_offset(rec.breach_date.year_month(), rec.report_date.year_month());
        if (t < 1 || t > n_rows) continue;
        last_report = std::max(last_report, t + d - 1);
        if (d > max_delay) continue;
        kept.push_back({t, d});
    }

    std::vector<std::vector<long>> counts(n_rows, std::vector<long>(max_delay, -1));
    for (int t = 1; t <= n_rows; ++t) {
        const int prefix = std::clamp(last_report - t + 1, 0, max_delay);
        for (int d = 1; d <= prefix; ++d) counts[t - 1][d - 1] = 0;
    }
    for (const auto& b : kept) counts[b.t - 1][b.d - 1] += 1;

    return ReportingTriangle(origin_start, present, max_delay, std::move(counts));
}

ReportingTriangle mask_to_present(const ReportingTriangle& tri, int t_cut) {
    return tri.masked_to(t_cut);
}

std::vector<std::vector<long>> cumulate(const ReportingTriangle& tri) {
    std::vector<std::vector<long>> grid(tri.n_rows(), std::vector<long>(tri.max_delay(), -1));
    for (int t = 1; t <= tri.n_rows(); ++t) {
        long run = 0;
        for (int d = 1; d <= tri.max_delay(); ++d) {
            if (!tri.known(t, d)) break;
            run += tri.count(t, d);
            grid[t - 1][d - 1] = run;
        }
    }
    return grid;
}

} // namespace ibnr
