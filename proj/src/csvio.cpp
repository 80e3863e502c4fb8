#include "ibnr/csvio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "ibnr/common.hpp"

namespace ibnr {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    // ignore trailing blank lines
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write '" + path + "'");
    return out;
}

[[noreturn]] void bad_line(const std::string& path, size_t lineno, const std::string& msg) {
    throw InputError(path + ":" + std::to_string(lineno) + ": " + msg);
}

double parse_double(const std::string& path, size_t lineno, const std::string& s) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) bad_line(path, lineno, "trailing characters in number '" + s + "'");
        return v;
    } catch (const InputError&) {
        throw;
    } catch (...) {
        bad_line(path, lineno, "malformed number '" + s + "'");
    }
}

long parse_long(const std::string& path, size_t lineno, const std::string& s) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) bad_line(path, lineno, "trailing characters in integer '" + s + "'");
        return v;
    } catch (const InputError&) {
        throw;
    } catch (...) {
        bad_line(path, lineno, "malformed integer '" + s + "'");
    }
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

} // namespace

std::vector<IncidentRecord> read_incidents_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + ": empty incident file");
    if (split_fields(lines[0]) != std::vector<std::string>{"id", "breach_date", "report_date"}) {
        bad_line(path, 1, "expected header id,breach_date,report_date");
    }
    std::vector<IncidentRecord> records;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != 3) bad_line(path, i + 1, "expected 3 fields, got " + std::to_string(f.size()));
        IncidentRecord rec;
        rec.id = f[0];
        try {
            rec.breach_date = parse_date(f[1]);
            rec.report_date = parse_date(f[2]);
        } catch (const InputError& e) {
            bad_line(path, i + 1, std::string(e.what()) + " (record '" + rec.id + "')");
        }
        if (rec.report_date < rec.breach_date) {
            bad_line(path, i + 1, "record '" + rec.id + "': report_date precedes breach_date");
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw InputError(path + ": no incident records");
    return records;
}

ReportingTriangle read_triangle_csv(const std::string& path, std::optional<int> present,
                                    YearMonth origin_start) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + ": empty triangle file");
    const auto header = split_fields(lines[0]);
    if (header.size() < 2 || header[0] != "t") {
        bad_line(path, 1, "expected header t,d1,...,dD");
    }
    const int d_max = static_cast<int>(header.size()) - 1;
    for (int d = 1; d <= d_max; ++d) {
        if (header[d] != "d" + std::to_string(d)) {
            bad_line(path, 1, "expected column d" + std::to_string(d) + ", got " + header[d]);
        }
    }

    std::vector<std::vector<long>> counts;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_fields(lines[i]);
        if (static_cast<int>(f.size()) != d_max + 1) {
            bad_line(path, i + 1, "expected " + std::to_string(d_max + 1) + " fields");
        }
        const long t = parse_long(path, i + 1, f[0]);
        if (t != static_cast<long>(counts.size()) + 1) {
            bad_line(path, i + 1, "origin rows must be consecutive starting at t=1");
        }
        std::vector<long> row(d_max, -1);
        for (int d = 1; d <= d_max; ++d) {
            if (f[d].empty()) continue;
            const long v = parse_long(path, i + 1, f[d]);
            if (v < 0) bad_line(path, i + 1, "negative count in column d" + std::to_string(d));
            row[d - 1] = v;
        }
        counts.push_back(std::move(row));
    }
    if (counts.empty()) throw InputError(path + ": triangle has no rows");

    const int n_rows = static_cast<int>(counts.size());
    int t_infer = n_rows + 1;
    for (int t = 1; t <= n_rows; ++t) {
        int prefix = 0;
        while (prefix < d_max && counts[t - 1][prefix] >= 0) ++prefix;
        if (prefix < d_max) t_infer = std::min(t_infer, t + prefix);
    }
    const int t_use = present.value_or(t_infer);
    if (t_use < 1 || t_use > n_rows + 1) {
        throw InputError(path + ": present T=" + std::to_string(t_use) +
                         " outside 1.." + std::to_string(n_rows + 1));
    }
    return ReportingTriangle(origin_start, t_use, d_max, std::move(counts));
}

void write_triangle_csv(const std::string& path, const ReportingTriangle& tri) {
    auto out = open_out(path);
    out << "t";
    for (int d = 1; d <= tri.max_delay(); ++d) out << ",d" << d;
    out << "\n";
    for (int t = 1; t <= tri.n_rows(); ++t) {
        out << t;
        for (int d = 1; d <= tri.max_delay(); ++d) {
            out << ",";
            if (tri.known(t, d)) out << tri.count(t, d);
        }
        out << "\n";
    }
}

void write_truth_json(const std::string& path, const SynthTruth& truth) {
    nlohmann::json j;
    j["seed"] = truth.seed;
    j["t_rows"] = truth.t_rows;
    j["delays"] = truth.delays;
    j["alpha"] = truth.alpha;
    j["beta"] = truth.beta;
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

SynthTruth read_truth_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        SynthTruth t{};
        t.seed = j.at("seed").get<uint64_t>();
        t.t_rows = j.at("t_rows").get<int>();
        t.delays = j.at("delays").get<int>();
        for (int i = 0; i < 3; ++i) {
            t.alpha[i] = j.at("alpha").at(i).get<double>();
            t.beta[i] = j.at("beta").at(i).get<double>();
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ": malformed truth file: " + e.what());
    }
}

void write_posterior_csv(const std::string& path, const PosteriorSamples& samples) {
    auto out = open_out(path);
    out << "chain,iter";
    for (const char* name : param_names()) out << "," << name;
    out << "\n";
    for (size_t c = 0; c < samples.chains.size(); ++c) {
        for (size_t i = 0; i < samples.chains[c].size(); ++i) {
            const long iter =
                samples.config.burn_in + static_cast<long>(i + 1) * samples.config.thin;
            out << c << "," << iter;
            for (double v : samples.chains[c][i].flat()) out << "," << fmt_g17(v);
            out << "\n";
        }
    }
}

PosteriorSamples read_posterior_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + ": empty posterior file");
    {
        std::string expect = "chain,iter";
        for (const char* name : param_names()) expect += std::string(",") + name;
        if (lines[0] != expect) bad_line(path, 1, "unexpected posterior header");
    }
    std::map<long, std::vector<ModelParams>> by_chain;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != 2 + ModelParams::dim) bad_line(path, i + 1, "expected 14 fields");
        const long chain = parse_long(path, i + 1, f[0]);
        std::array<double, ModelParams::dim> flat{};
        for (int j = 0; j < ModelParams::dim; ++j) {
            flat[j] = parse_double(path, i + 1, f[2 + j]);
        }
        for (int j = 6; j < 12; ++j) {
            if (!(flat[j] > 0.0)) bad_line(path, i + 1, "nonpositive scale parameter");
        }
        by_chain[chain].push_back(ModelParams::from_flat(flat));
    }
    if (by_chain.empty()) throw InputError(path + ": posterior file has no draws");
    PosteriorSamples samples;
    for (auto& [chain, draws] : by_chain) samples.chains.push_back(std::move(draws));
    samples.config.n_chains = static_cast<int>(samples.chains.size());
    return samples;
}

void write_summary_csv(const std::string& path, const std::vector<ParamSummary>& summary) {
    auto out = open_out(path);
    out << "param,mean,sd,q2.5,q50,q97.5\n";
    for (const auto& s : summary) {
        out << s.name << "," << fmt_g17(s.mean) << "," << fmt_g17(s.sd) << "," << fmt_g17(s.q2_5)
            << "," << fmt_g17(s.q50) << "," << fmt_g17(s.q97_5) << "\n";
    }
}

void write_convergence_csv(const std::string& path, const ConvergenceReport& report) {
    auto out = open_out(path);
    out << "param,psrf,ess\n";
    for (int j = 0; j < ModelParams::dim; ++j) {
        out << param_names()[j] << "," << fmt_g17(report.psrf[j]) << "," << fmt_g17(report.ess[j])
            << "\n";
    }
    out << "mpsrf," << fmt_g17(report.mpsrf) << ",\n";
}

void write_nowcast_csv(const std::string& path, const NowcastResult& result) {
    auto out = open_out(path);
    out << "t,origin_month,observed_partial,point,lo95,hi95,realized\n";
    for (const auto& row : result) {
        out << row.t << "," << row.origin_month.str() << "," << row.observed_partial << ","
            << fmt_g17(row.point) << "," << fmt_g17(row.lo95) << "," << fmt_g17(row.hi95) << ",";
        if (row.realized) out << *row.realized;
        out << "\n";
    }
}

NowcastResult read_nowcast_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty()) throw InputError(path + ": empty nowcast file");
    if (lines[0] != "t,origin_month,observed_partial,point,lo95,hi95,realized") {
        bad_line(path, 1, "unexpected nowcast header");
    }
    NowcastResult result;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != 7) bad_line(path, i + 1, "expected 7 fields");
        NowcastRow row;
        row.t = static_cast<int>(parse_long(path, i + 1, f[0]));
        try {
            row.origin_month = parse_year_month(f[1]);
        } catch (const InputError& e) {
            bad_line(path, i + 1, e.what());
        }
        row.observed_partial = parse_long(path, i + 1, f[2]);
        row.point = parse_double(path, i + 1, f[3]);
        row.lo95 = parse_double(path, i + 1, f[4]);
        row.hi95 = parse_double(path, i + 1, f[5]);
        if (!f[6].empty()) row.realized = parse_long(path, i + 1, f[6]);
        result.push_back(std::move(row));
    }
    if (result.empty()) throw InputError(path + ": nowcast file has no rows");
    return result;
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    auto out = open_out(path);
    out << "model,rmse,mae\n";
    for (const auto& r : rows) {
        out << r.model << "," << fmt_fixed(r.rmse, 4) << "," << fmt_fixed(r.mae, 4) << "\n";
    }
}

// Models across the top, one row per metric.
std::string comparison_text_table(const std::vector<ComparisonRow>& rows) {
    size_t w = 9;
    for (const auto& r : rows) w = std::max(w, r.model.size() + 2);
    std::ostringstream out;
    auto cell = [&](const std::string& s) {
        out << std::right;
        out.width(static_cast<std::streamsize>(w));
        out << s;
    };
    out << "     ";
    for (const auto& r : rows) cell(r.model);
    out << "\n";
    out << "RMSE ";
    for (const auto& r : rows) cell(fmt_fixed(r.rmse, 4));
    out << "\n";
    out << "MAE  ";
    for (const auto& r : rows) cell(fmt_fixed(r.mae, 4));
    out << "\n";
    return out.str();
}

void write_points_csv(const std::string& path, const std::vector<ModelPoints>& models) {
    auto out = open_out(path);
    out << "model,t,point,realized\n";
    for (const auto& m : models) {
        for (size_t i = 0; i < m.t.size(); ++i) {
            out << m.model << "," << m.t[i] << "," << fmt_g17(m.point[i]) << ","
                << fmt_g17(m.realized[i]) << "\n";
        }
    }
}

void write_reserve_csv(const std::string& path, const ReserveTable& table) {
    auto out = open_out(path);
    out << "month,estimated,paid,ibnr,ultimate,ibnr_change_pct\n";
    auto emit = [&](const ReserveRow& row, bool with_change) {
        out << row.month << "," << fmt_fixed(row.estimated, 3) << "," << fmt_fixed(row.paid, 3)
            << "," << fmt_fixed(row.ibnr, 3) << ",";
        if (row.ultimate) out << fmt_fixed(*row.ultimate, 3);
        out << ",";
        if (with_change) {
            if (row.change_pct) out << fmt_fixed(*row.change_pct, 2);
            else out << "--";
        }
        out << "\n";
    };
    for (const auto& row : table.rows) emit(row, true);
    emit(table.totals, false);
}

} // namespace ibnr
