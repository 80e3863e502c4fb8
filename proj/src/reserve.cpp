#include "ibnr/reserve.hpp"

#include "ibnr/common.hpp"

namespace ibnr {

CostModel::CostModel(double cost) : cost_per_incident(cost) {
    if (cost < 0.0) throw InputError("cost per incident must be nonnegative");
}

std::vector<std::optional<double>> ibnr_change_rate(std::span<const ReserveRow> rows) {
    if (rows.size() < 2) throw InputError("ibnr_change_rate: need at least two rows");
    std::vector<std::optional<double>> out(rows.size());
    for (size_t i = 1; i < rows.size(); ++i) {
        const double prev = rows[i - 1].ibnr;
        if (prev != 0.0) out[i] = 100.0 * (rows[i].ibnr - prev) / prev;
    }
    return out;
}

ReserveTable reserve_table(const NowcastResult& nowcasts, const CostModel& cost) {
    if (nowcasts.empty()) throw InputError("reserve_table: empty nowcast");
    for (size_t i = 1; i < nowcasts.size(); ++i) {
        if (nowcasts[i].t != nowcasts[i - 1].t + 1) {
            throw InputError("reserve_table: nowcast rows must cover a contiguous window");
        }
    }

    const double c = cost.cost_per_incident;
    ReserveTable table;
    bool all_ultimate = true;
    for (const auto& nc : nowcasts) {
        ReserveRow row;
        row.month = nc.origin_month.str();
        row.paid = static_cast<double>(nc.observed_partial) * c;
        row.estimated = nc.point * c;
        row.ibnr = row.estimated - row.paid;
        if (nc.realized) row.ultimate = static_cast<double>(*nc.realized) * c;
        else all_ultimate = false;
        table.rows.push_back(std::move(row));
    }

    if (table.rows.size() >= 2) {
        const auto changes = ibnr_change_rate(table.rows);
        for (size_t i = 0; i < table.rows.size(); ++i) table.rows[i].change_pct = changes[i];
    }

    table.totals.month = "total";
    double ult = 0.0;
    for (const auto& row : table.rows) {
        table.totals.estimated += row.estimated;
        table.totals.paid += row.paid;
        table.totals.ibnr += row.ibnr;
        if (row.ultimate) ult += *row.ultimate;
    }
    if (all_ultimate) table.totals.ultimate = ult;
    return table;
}

} // namespace ibnr
