#pragma once

#include <span>
#include <string>
#include <vector>

namespace ibnr {

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

/// Product-moment correlation; needs length >= 2 and nonzero variances.
double pearson(std::span<const double> x, std::span<const double> y);

struct ModelPredictions {
    std::string model;
    std::vector<double> points; // aligned with the shared realized vector
};

struct ComparisonRow {
    std::string model;
    double rmse = 0.0;
    double mae = 0.0;
};

/// One row per model, all scored against the same realized totals. Throws
/// when any prediction vector is misaligned with the realized window.
std::vector<ComparisonRow> comparison_table(const std::vector<ModelPredictions>& predictions,
                                            std::span<const double> realized);

} // namespace ibnr
