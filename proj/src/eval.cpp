#include "ibnr/eval.hpp"

#include <cmath>

#include "ibnr/common.hpp"

namespace ibnr {

namespace {
void check_lengths(std::span<const double> a, std::span<const double> b, const char* op) {
    if (a.size() != b.size() || a.empty()) {
        throw InputError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    }
}
} // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "rmse");
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "mae");
    double s = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) s += std::fabs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InputError("pearson: length mismatch");
    if (x.size() < 2) throw InputError("pearson: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw NumericalError("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<ComparisonRow> comparison_table(const std::vector<ModelPredictions>& predictions,
                                            std::span<const double> realized) {
    if (predictions.empty()) throw InputError("comparison_table: no models");
    std::vector<ComparisonRow> rows;
    for (const auto& mp : predictions) {
        if (mp.points.size() != realized.size()) {
            throw InputError("comparison_table: model " + mp.model +
                             " scored on a misaligned window (" + std::to_string(mp.points.size()) +
                             " vs " + std::to_string(realized.size()) + ")");
        }
        rows.push_back({mp.model, rmse(mp.points, realized), mae(mp.points, realized)});
    }
    return rows;
}

} // namespace ibnr
