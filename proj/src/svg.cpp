#include "ibnr/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ibnr/common.hpp"

namespace ibnr {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 420.0;
constexpr double kMarginL = 60.0;
constexpr double kMarginR = 20.0;
constexpr double kMarginT = 24.0;
constexpr double kMarginB = 48.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

void write_nowcast_svg(const std::string& path, const NowcastResult& result) {
    if (result.empty()) throw InputError("svg: empty nowcast");
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");

    double ymax = 1.0;
    for (const auto& r : result) {
        ymax = std::max({ymax, r.hi95, static_cast<double>(r.observed_partial),
                         r.realized ? static_cast<double>(*r.realized) : 0.0});
    }
    ymax *= 1.08;

    const double plot_w = kWidth - kMarginL - kMarginR;
    const double plot_h = kHeight - kMarginT - kMarginB;
    const double n = static_cast<double>(result.size());
    auto xpos = [&](size_t i) {
        return n == 1 ? kMarginL + plot_w / 2
                      : kMarginL + plot_w * static_cast<double>(i) / (n - 1);
    };
    auto ypos = [&](double v) { return kMarginT + plot_h * (1.0 - v / ymax); };

    auto polyline = [&](auto value, const char* color, const char* dash) {
        out << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dash) out << " stroke-dasharray=\"" << dash << "\"";
        out << " points=\"";
        for (size_t i = 0; i < result.size(); ++i) {
            out << num(xpos(i)) << "," << num(ypos(value(result[i]))) << " ";
        }
        out << "\"/>\n";
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes and horizontal grid
    for (int g = 0; g <= 4; ++g) {
        const double v = ymax * g / 4.0;
        const double y = ypos(v);
        out << "  <line x1=\"" << num(kMarginL) << "\" y1=\"" << num(y) << "\" x2=\""
            << num(kWidth - kMarginR) << "\" y2=\"" << num(y)
            << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        out << "  <text x=\"" << num(kMarginL - 8) << "\" y=\"" << num(y + 4)
            << "\" font-size=\"11\" text-anchor=\"end\" fill=\"#444444\">" << num(v)
            << "</text>\n";
    }
    out << "  <line x1=\"" << num(kMarginL) << "\" y1=\"" << num(kMarginT) << "\" x2=\""
        << num(kMarginL) << "\" y2=\"" << num(kHeight - kMarginB)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "  <line x1=\"" << num(kMarginL) << "\" y1=\"" << num(kHeight - kMarginB) << "\" x2=\""
        << num(kWidth - kMarginR) << "\" y2=\"" << num(kHeight - kMarginB)
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // month labels
    for (size_t i = 0; i < result.size(); ++i) {
        out << "  <text x=\"" << num(xpos(i)) << "\" y=\"" << num(kHeight - kMarginB + 16)
            << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#444444\">"
            << result[i].origin_month.str() << "</text>\n";
    }

    polyline([](const NowcastRow& r) { return static_cast<double>(r.observed_partial); },
             "#555555", nullptr);
    polyline([](const NowcastRow& r) { return r.lo95; }, "#d08770", "5,4");
    polyline([](const NowcastRow& r) { return r.hi95; }, "#d08770", "5,4");
    polyline([](const NowcastRow& r) { return r.point; }, "#1f6fb2", nullptr);

    bool any_realized = std::any_of(result.begin(), result.end(),
                                    [](const NowcastRow& r) { return r.realized.has_value(); });
    if (any_realized) {
        out << "  <polyline fill=\"none\" stroke=\"#2e8b57\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < result.size(); ++i) {
            if (!result[i].realized) continue;
            out << num(xpos(i)) << "," << num(ypos(static_cast<double>(*result[i].realized)))
                << " ";
        }
        out << "\"/>\n";
    }

    const char* legend[4][2] = {{"#555555", "observed"},
                                {"#1f6fb2", "nowcast"},
                                {"#d08770", "95% bounds"},
                                {"#2e8b57", "realized"}};
    const int n_legend = any_realized ? 4 : 3;
    for (int i = 0; i < n_legend; ++i) {
        const double x = kMarginL + 10 + 130.0 * i;
        out << "  <line x1=\"" << num(x) << "\" y1=\"" << num(kMarginT) << "\" x2=\""
            << num(x + 22) << "\" y2=\"" << num(kMarginT) << "\" stroke=\"" << legend[i][0]
            << "\" stroke-width=\"2\"/>\n";
        out << "  <text x=\"" << num(x + 28) << "\" y=\"" << num(kMarginT + 4)
            << "\" font-size=\"11\" fill=\"#222222\">" << legend[i][1] << "</text>\n";
    }
    out << "</svg>\n";
}

} // namespace ibnr
