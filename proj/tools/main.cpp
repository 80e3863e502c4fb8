// ibnr: simulate, fit, nowcast, compare and price reporting-delay triangles
// of incident counts. Every command is deterministic given its flags; all
// randomness flows from explicit --seed values.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ibnr/baselines.hpp"
#include "ibnr/common.hpp"
#include "ibnr/csvio.hpp"
#include "ibnr/eval.hpp"
#include "ibnr/mcmc.hpp"
#include "ibnr/nowcast.hpp"
#include "ibnr/reserve.hpp"
#include "ibnr/svg.hpp"
#include "ibnr/synth.hpp"
#include "ibnr/triangle.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConvergence = 4;

std::array<double, 6> parse_params_flag(const std::string& text) {
    std::array<double, 6> out{};
    std::stringstream ss(text);
    std::string piece;
    size_t i = 0;
    while (std::getline(ss, piece, ',')) {
        if (i >= 6) throw ibnr::InputError("--params expects exactly 6 comma-separated values");
        try {
            out[i++] = std::stod(piece);
        } catch (...) {
            throw ibnr::InputError("--params: malformed number '" + piece + "'");
        }
    }
    if (i != 6) throw ibnr::InputError("--params expects exactly 6 comma-separated values");
    return out;
}

ibnr::kernels::SimdMode parse_simd(const std::string& s) {
    if (s == "scalar") return ibnr::kernels::SimdMode::Scalar;
    if (s == "avx2") return ibnr::kernels::SimdMode::Avx2;
    if (s == "auto") return ibnr::kernels::SimdMode::Auto;
    throw ibnr::InputError("--simd must be auto, scalar or avx2");
}

// Loads either an incident CSV (header id,...) or a triangle CSV (header
// t,...). An empty origin string means "auto": the earliest breach month for
// incidents, 2018-01 for bare triangles. A --present override is applied as
// a re-mask so its validation (T_cut >= D+1, no unmasking) applies.
ibnr::ReportingTriangle load_data(const std::string& path, std::optional<int> present,
                                  const std::string& origin_flag, int delays) {
    std::ifstream probe(path);
    if (!probe) throw ibnr::InputError("cannot open '" + path + "'");
    std::string first_line;
    std::getline(probe, first_line);
    probe.close();

    std::optional<ibnr::YearMonth> origin;
    if (!origin_flag.empty()) origin = ibnr::parse_year_month(origin_flag);

    if (first_line.rfind("id,", 0) == 0) {
        const auto records = ibnr::read_incidents_csv(path);
        ibnr::YearMonth start;
        if (origin) {
            start = *origin;
        } else {
            start = records.front().breach_date.year_month();
            for (const auto& rec : records) start = std::min(start, rec.breach_date.year_month());
        }
        int last_report = 1;
        for (const auto& rec : records) {
            if (rec.breach_date.year_month() < start) continue;
            last_report = std::max(last_report,
                                   ibnr::month_offset(start, rec.report_date.year_month()));
        }
        const int t_full = last_report + 1;
        auto tri = ibnr::ingest_incidents(records, start, t_full, delays);
        if (present) return tri.masked_to(*present);
        return tri;
    }

    auto tri = ibnr::read_triangle_csv(path, std::nullopt, origin.value_or(ibnr::YearMonth{2018, 1}));
    if (present) return tri.masked_to(*present);
    return tri;
}

struct FitFlags {
    std::string preset = "desk";
    int chains = -1;
    long burnin = -1;
    long iters = -1;
    int thin = -1;
    uint64_t seed = 0;
    int threads = 0;
    std::string simd = "auto";

    ibnr::ChainConfig to_config() const {
        ibnr::ChainConfig cfg;
        if (preset == "desk") cfg = ibnr::ChainConfig::desk();
        else if (preset == "paper-scale") cfg = ibnr::ChainConfig::paper_scale();
        else throw ibnr::InputError("unknown preset '" + preset + "' (desk or paper-scale)");
        if (chains > 0) cfg.n_chains = chains;
        if (burnin >= 0) cfg.burn_in = burnin;
        if (iters > 0) cfg.total_iterations = iters;
        if (thin > 0) cfg.thin = thin;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.simd = parse_simd(simd);
        return cfg;
    }
};

void add_fit_flags(CLI::App* cmd, FitFlags& f) {
    cmd->add_option("--preset", f.preset, "sampler preset: desk or paper-scale");
    cmd->add_option("--chains", f.chains, "number of chains");
    cmd->add_option("--burnin", f.burnin, "burn-in iterations");
    cmd->add_option("--iters", f.iters, "total iterations per chain");
    cmd->add_option("--thin", f.thin, "thinning interval");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_option("--threads", f.threads, "worker thread cap (0 = auto)");
    cmd->add_option("--simd", f.simd, "kernel selection: auto, scalar, avx2");
}

int cmd_simulate(uint64_t seed, int rows, int delays, const std::string& out,
                 const std::string& params, const std::string& origin) {
    ibnr::SynthConfig cfg;
    cfg.seed = seed;
    cfg.t_rows = rows;
    cfg.delays = delays;
    cfg.origin_start = ibnr::parse_year_month(origin);
    if (!params.empty()) {
        const auto v = parse_params_flag(params);
        cfg.alpha = {v[0], v[1], v[2]};
        cfg.beta = {v[3], v[4], v[5]};
    }
    const auto [tri, truth] = ibnr::generate(cfg);
    ibnr::write_triangle_csv(out, tri);
    ibnr::write_truth_json(out + ".truth.json", truth);
    std::cout << "wrote " << out << " (" << rows << "x" << delays << ") and " << out
              << ".truth.json\n";
    return kExitOk;
}

int cmd_fit(const std::string& data, std::optional<int> present, const std::string& origin,
            int delays, const FitFlags& flags, const std::string& out_dir,
            bool allow_nonconverged) {
    const auto tri = load_data(data, present, origin, delays);
    ibnr::ChainConfig cfg = flags.to_config();
    if (cfg.n_chains < 2) {
        throw ibnr::InputError("fit needs at least 2 chains for convergence diagnostics");
    }

    const auto samples = ibnr::run_chains(tri, cfg);
    const auto report = ibnr::convergence_report(samples);
    const auto summary = ibnr::summarize(samples);

    std::filesystem::create_directories(out_dir);
    ibnr::write_posterior_csv(out_dir + "/draws.csv", samples);
    ibnr::write_summary_csv(out_dir + "/summary.csv", summary);
    ibnr::write_convergence_csv(out_dir + "/convergence.csv", report);

    const std::string kernel_name =
        cfg.simd == ibnr::kernels::SimdMode::Auto ? ibnr::kernels::active_kernel_name()
                                                  : flags.simd;
    std::cout << "fit: " << cfg.n_chains << " chains x " << samples.draws_per_chain()
              << " retained draws (kernel: " << kernel_name << "), mpsrf " << report.mpsrf
              << "\n";

    std::vector<std::string> offenders;
    for (int j = 0; j < ibnr::ModelParams::dim; ++j) {
        if (report.psrf[j] > 1.1) {
            offenders.push_back(std::string(ibnr::param_names()[j]) + " (" +
                                std::to_string(report.psrf[j]) + ")");
        }
    }
    if (!offenders.empty() && !allow_nonconverged) {
        std::ostringstream msg;
        msg << "PSRF above 1.1 for";
        for (const auto& o : offenders) msg << " " << o;
        msg << "; rerun longer or pass --allow-nonconverged";
        throw ibnr::ConvergenceError(msg.str());
    }
    return kExitOk;
}

int cmd_nowcast(const std::string& posterior, const std::string& data, std::optional<int> present,
                const std::string& origin, int delays, uint64_t seed, const std::string& out,
                const std::string& svg) {
    const auto tri = load_data(data, present, origin, delays);
    const auto samples = ibnr::read_posterior_csv(posterior);
    const auto draws = samples.pooled();
    if (tri.nowcast_window().empty()) {
        throw ibnr::InputError("nothing to nowcast: the triangle has no partially observed rows");
    }
    const auto result = ibnr::nowcast_totals(draws, tri, seed);
    size_t excluded = 0;
    ibnr::scatter_pairs(result, &excluded);
    if (excluded > 0 && excluded < result.size()) {
        std::cerr << "warning: " << excluded << " nowcast rows lack realized truth\n";
    }
    ibnr::write_nowcast_csv(out, result);
    if (!svg.empty()) ibnr::write_nowcast_svg(svg, result);
    std::cout << "wrote " << out << " (" << result.size() << " months)\n";
    return kExitOk;
}

int cmd_compare(const std::string& data, int holdout, const std::string& origin, int delays,
                const std::string& models_flag, const FitFlags& flags, int resamples,
                const std::string& out, const std::string& points_out) {
    const auto full = load_data(data, std::nullopt, origin, delays);
    const auto masked = full.masked_to(holdout);

    const auto window = masked.nowcast_window();
    if (window.empty()) throw ibnr::InputError("compare: empty nowcast window at this holdout");
    std::vector<double> realized;
    for (int t : window) {
        const auto r = masked.realized_total(t);
        if (!r) {
            throw ibnr::InputError("compare: no realized truth for origin row " +
                                   std::to_string(t) + "; holdout is too recent for this data");
        }
        realized.push_back(static_cast<double>(*r));
    }

    std::vector<std::string> tags;
    {
        std::stringstream ss(models_flag);
        std::string piece;
        while (std::getline(ss, piece, ',')) tags.push_back(piece);
    }
    if (tags.empty()) throw ibnr::InputError("compare: no models requested");

    auto points_at = [&](const std::vector<int>& rows, auto&& value) {
        std::vector<double> pts;
        for (int t : window) {
            const auto it = std::find(rows.begin(), rows.end(), t);
            if (it == rows.end()) {
                throw ibnr::InputError("compare: model window misaligned at row " +
                                       std::to_string(t));
            }
            pts.push_back(value(static_cast<size_t>(it - rows.begin())));
        }
        return pts;
    };

    std::vector<ibnr::ModelPredictions> preds;
    for (const auto& tag : tags) {
        ibnr::ModelPredictions mp;
        mp.model = tag;
        if (tag == "m0") {
            ibnr::ChainConfig cfg = flags.to_config();
            const auto samples = ibnr::run_chains(masked, cfg);
            const auto nc = ibnr::nowcast_totals(samples, masked, ibnr::mix_seed(flags.seed, 97));
            for (size_t i = 0; i < nc.size(); ++i) mp.points.push_back(nc[i].point);
        } else if (tag == "m1") {
            const auto cl = ibnr::chain_ladder(masked);
            mp.points = points_at(cl.rows, [&](size_t i) { return cl.ultimate(i); });
        } else if (tag == "m2") {
            const auto mk = ibnr::mack(masked);
            mp.points = points_at(mk.base.rows, [&](size_t i) { return mk.base.ultimate(i); });
        } else if (tag == "m3") {
            ibnr::BootstrapConfig bcfg;
            bcfg.n_resamples = resamples;
            bcfg.seed = ibnr::mix_seed(flags.seed, 3);
            const auto bs = ibnr::bootstrap_chain_ladder(masked, bcfg);
            mp.points = points_at(bs.rows, [&](size_t i) {
                return static_cast<double>(masked.observed_partial_total(bs.rows[i])) +
                       bs.point_reserve_by_row[i];
            });
        } else if (tag == "m4") {
            const auto glm = ibnr::odp_glm(masked);
            mp.points = points_at(glm.rows, [&](size_t i) {
                return static_cast<double>(masked.observed_partial_total(glm.rows[i])) +
                       glm.reserve_by_row[i];
            });
        } else {
            throw ibnr::InputError("compare: unknown model tag '" + tag +
                                   "' (expected m0,m1,m2,m3,m4)");
        }
        preds.push_back(std::move(mp));
    }

    const auto table = ibnr::comparison_table(preds, realized);
    ibnr::write_comparison_csv(out, table);
    std::cout << ibnr::comparison_text_table(table);
    if (!points_out.empty()) {
        std::vector<ibnr::ModelPoints> mps;
        for (const auto& p : preds) {
            ibnr::ModelPoints m;
            m.model = p.model;
            m.t = window;
            m.point = p.points;
            m.realized = realized;
            mps.push_back(std::move(m));
        }
        ibnr::write_points_csv(points_out, mps);
    }
    return kExitOk;
}

int cmd_reserve(const std::string& nowcast_path, double cost, const std::string& out) {
    if (cost < 0.0) throw ibnr::InputError("reserve: --cost must be nonnegative");
    const auto nc = ibnr::read_nowcast_csv(nowcast_path);
    const auto table = ibnr::reserve_table(nc, ibnr::CostModel(cost));
    ibnr::write_reserve_csv(out, table);
    std::cout << "wrote " << out << " (" << table.rows.size() << " months, total IBNR "
              << table.totals.ibnr << ")\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian nowcasting of IBNR incidents from reporting-delay triangles"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic triangle with known truth");
    uint64_t sim_seed = 0;
    int sim_rows = 72, sim_delays = 12;
    std::string sim_out, sim_params, sim_origin = "2018-01";
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--rows", sim_rows, "origin months");
    sim->add_option("--delays", sim_delays, "maximum delay D");
    sim->add_option("--out", sim_out, "output triangle CSV")->required();
    sim->add_option("--params", sim_params, "a0,a1,a2,b0,b1,b2 (default study truth)");
    sim->add_option("--origin", sim_origin, "origin start month YYYY-MM");

    // fit
    auto* fit = app.add_subcommand("fit", "sample the posterior on a triangle");
    std::string fit_data, fit_origin, fit_outdir;
    int fit_present = -1, fit_delays = 12;
    bool fit_allow = false;
    FitFlags fit_flags;
    fit->add_option("--data", fit_data, "incidents.csv or triangle.csv")->required();
    fit->add_option("--present", fit_present, "present time T (masks the triangle)")->check(CLI::PositiveNumber);
    fit->add_option("--origin", fit_origin, "origin start month YYYY-MM (default: inferred)");
    fit->add_option("--delays", fit_delays, "maximum delay D for incident ingestion");
    add_fit_flags(fit, fit_flags);
    fit->add_option("--out-dir", fit_outdir, "output directory")->required();
    fit->add_flag("--allow-nonconverged", fit_allow, "do not fail on PSRF > 1.1");

    // nowcast
    auto* now = app.add_subcommand("nowcast", "posterior-predictive IBNR nowcasts");
    std::string now_post, now_data, now_origin, now_out, now_svg;
    int now_present = -1, now_delays = 12;
    uint64_t now_seed = 0;
    now->add_option("--posterior", now_post, "draws.csv from fit")->required();
    now->add_option("--data", now_data, "incidents.csv or triangle.csv")->required();
    now->add_option("--present", now_present, "present time T (masks the triangle)")->check(CLI::PositiveNumber);
    now->add_option("--origin", now_origin, "origin start month YYYY-MM (default: inferred)");
    now->add_option("--delays", now_delays, "maximum delay D for incident ingestion");
    now->add_option("--seed", now_seed, "RNG seed");
    now->add_option("--out", now_out, "output nowcast CSV")->required();
    now->add_option("--svg", now_svg, "optional SVG chart path");

    // compare
    auto* cmp = app.add_subcommand("compare", "backtest M0-M4 on a held-out window");
    std::string cmp_data, cmp_origin, cmp_models = "m0,m1,m2,m3,m4", cmp_out,
                cmp_points;
    int cmp_holdout = 0, cmp_delays = 12, cmp_resamples = 1000;
    FitFlags cmp_flags;
    cmp->add_option("--data", cmp_data, "full-truth triangle or incidents CSV")->required();
    cmp->add_option("--holdout", cmp_holdout, "masked present time T_cut")->required();
    cmp->add_option("--origin", cmp_origin, "origin start month YYYY-MM (default: inferred)");
    cmp->add_option("--delays", cmp_delays, "maximum delay D for incident ingestion");
    cmp->add_option("--models", cmp_models, "comma list from m0,m1,m2,m3,m4");
    cmp->add_option("--resamples", cmp_resamples, "bootstrap resamples for m3");
    add_fit_flags(cmp, cmp_flags);
    cmp->add_option("--out", cmp_out, "output metrics CSV")->required();
    cmp->add_option("--points-out", cmp_points, "optional per-model point predictions CSV");

    // reserve
    auto* res = app.add_subcommand("reserve", "monetary reserve table from a nowcast");
    std::string res_nowcast, res_out;
    double res_cost = 4.35;
    res->add_option("--nowcast", res_nowcast, "nowcast CSV")->required();
    res->add_option("--cost", res_cost, "cost per incident (millions)");
    res->add_option("--out", res_out, "output reserve CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (sim->parsed()) {
            return cmd_simulate(sim_seed, sim_rows, sim_delays, sim_out, sim_params, sim_origin);
        }
        if (fit->parsed()) {
            return cmd_fit(fit_data,
                           fit_present > 0 ? std::optional<int>(fit_present) : std::nullopt,
                           fit_origin, fit_delays, fit_flags, fit_outdir, fit_allow);
        }
        if (now->parsed()) {
            return cmd_nowcast(now_post, now_data,
                               now_present > 0 ? std::optional<int>(now_present) : std::nullopt,
                               now_origin, now_delays, now_seed, now_out, now_svg);
        }
        if (cmp->parsed()) {
            return cmd_compare(cmp_data, cmp_holdout, cmp_origin, cmp_delays, cmp_models,
                               cmp_flags, cmp_resamples, cmp_out, cmp_points);
        }
        if (res->parsed()) {
            return cmd_reserve(res_nowcast, res_cost, res_out);
        }
    } catch (const ibnr::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ibnr::ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const ibnr::NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
