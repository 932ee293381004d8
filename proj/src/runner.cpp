#include "q1d/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "q1d/errors.hpp"
#include "q1d/liecheck.hpp"
#include "q1d/lyapunov.hpp"
#include "q1d/selftest.hpp"
#include "q1d/spectra.hpp"

namespace q1d {

namespace {

using nlohmann::json;

json cell_json(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v)) return nullptr;
            }
            return v;
        },
        c);
}

json table_json(const Table& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        json o = json::object();
        for (std::size_t k = 0; k < t.header.size(); ++k) o[t.header[k]] = cell_json(r[k]);
        rows.push_back(o);
    }
    return rows;
}

LyapOptions lyap_options(const RunConfig& cfg, unsigned threads) {
    LyapOptions o;
    o.steps = cfg.steps;
    o.realizations = cfg.realizations;
    o.reorth = cfg.reorth;
    o.burn_in = cfg.burn_in;
    o.threads = threads;
    return o;
}

SpectralPoint point_at(const ModelSpec& spec, double x) {
    return is_unitary_family(spec) ? SpectralPoint::at_angle(x) : SpectralPoint::at_energy(x);
}

std::string axis_name(const ModelSpec& spec) { return is_unitary_family(spec) ? "arg_z" : "E"; }

std::string pm(double v, double s) { return format_double17(v) + " +- " + format_double17(s); }

json closure_json(const LieClosureReport& r) {
    json g = json::array();
    for (const auto& [round, rank] : r.generations) g.push_back({{"round", round}, {"rank", rank}});
    return {{"closure_dim", r.closure_dim},
            {"target_dim", r.target_dim},
            {"generations", g},
            {"svd_tol", r.svd_tol},
            {"verdict", to_string(r.verdict)}};
}

TaskOutput lyap_scan(const RunConfig& cfg, unsigned threads) {
    const ModelSpec& m = *cfg.model;
    const int n = 2 * model_dimension(m);
    TaskOutput out;
    out.table.header.push_back(axis_name(m));
    for (int i = 1; i <= n; ++i) {
        out.table.header.push_back("gamma_" + std::to_string(i));
        out.table.header.push_back("sigma_" + std::to_string(i));
    }
    out.table.header.push_back("pairing_defect");
    const LyapOptions o = lyap_options(cfg, threads);
    double g0 = 0, s0 = 0;
    for (double x : cfg.grid) {
        const auto ls = lyap_spectrum(m, point_at(m, x), cfg.seed, o);
        std::vector<Cell> row{x};
        for (int i = 0; i < n; ++i) {
            row.emplace_back(ls.exponents[i]);
            row.emplace_back(ls.std_errors[i]);
        }
        row.emplace_back(ls.pairing_defect);
        out.table.rows.push_back(row);
        if (out.table.rows.size() == 1) g0 = ls.exponents[0], s0 = ls.std_errors[0];
    }
    out.json = json{{"task", "lyap-scan"}, {"steps", cfg.steps}, {"realizations", cfg.realizations},
                    {"reorth", cfg.reorth}, {"rows", table_json(out.table)}}.dump(2);
    out.summary = "lyap-scan: " + std::to_string(cfg.grid.size()) + " points, gamma_1 at first point = " + pm(g0, s0);
    return out;
}

TaskOutput ids(const RunConfig& cfg, unsigned threads) {
    const ModelSpec& m = *cfg.model;
    const auto curve = ids_estimate(m, cfg.grid, cfg.L, cfg.realizations, cfg.seed, threads);
    TaskOutput out;
    out.table.header = {curve.angles ? "angle" : "E", "N", "sigma"};
    for (std::size_t k = 0; k < curve.grid.size(); ++k)
        out.table.rows.push_back({curve.grid[k], curve.values[k], curve.std_errors[k]});
    out.json = json{{"task", "ids"}, {"L", cfg.L}, {"realizations", cfg.realizations}, {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = "ids: N(" + format_double17(curve.grid.front()) + ") = " + pm(curve.values.front(), curve.std_errors.front());
    return out;
}

TaskOutput furstenberg(const RunConfig& cfg, unsigned) {
    const ModelSpec& m = *cfg.model;
    const int D = model_dimension(m);
    std::vector<double> c(D, 1.0);
    if (const auto* cm = std::get_if<ContinuousQuasi1D>(&m)) c = cm->c;
    TaskOutput out;
    out.table.header = {"E", "D", "closure_dim", "target_dim", "verdict", "rounds"};
    json reports = json::array();
    bool all_full = true;
    int dim = 0;
    for (double E : cfg.grid) {
        const auto rep = check_lemma_spN(D, E, c, cfg.svd_tol);
        out.table.rows.push_back({E, static_cast<long long>(D), static_cast<long long>(rep.closure_dim),
                                  static_cast<long long>(rep.target_dim), to_string(rep.verdict),
                                  static_cast<long long>(rep.generations.size() - 1)});
        json j = closure_json(rep);
        j["E"] = E;
        reports.push_back(j);
        all_full = all_full && rep.verdict == LieClosureReport::Verdict::Full;
        dim = rep.closure_dim;
    }
    json doc{{"task", "furstenberg"}, {"D", D}, {"reports", reports}};
    out.summary = "furstenberg: D=" + std::to_string(D) + " verdict " + (all_full ? "Full" : "not Full") +
                  " (dim " + std::to_string(dim) + ")";
    if (cfg.d_O) {
        const double ell = std::holds_alternative<ContinuousQuasi1D>(m) ? std::get<ContinuousQuasi1D>(m).ell : 1.0;
        RMat v0;
        if (const auto* cm = std::get_if<ContinuousQuasi1D>(&m)) v0 = cm->V0;
        if (const auto* dm = std::get_if<DiscreteQuasi1D>(&m)) v0 = dm->V0;
        const auto di = disorder_interval(D, v0, c, *cfg.d_O, ell);
        json iv = nullptr;
        if (di.interval) iv = json::array({di.interval->first, di.interval->second});
        doc["disorder_interval"] = {{"lambda_min", di.lambda_min}, {"lambda_max", di.lambda_max},
                                    {"lambda0", di.lambda0},       {"ell_c", di.ell_c},
                                    {"d_O", di.d_O},               {"ell", di.ell},
                                    {"interval", iv}};
        out.summary += di.interval ? "; I(ell,D) = [" + format_double17(di.interval->first) + ", " +
                                         format_double17(di.interval->second) + "]"
                                   : "; I(ell,D) empty";
    }
    out.json = doc.dump(2);
    return out;
}

TaskOutput zipper_check(const RunConfig& cfg, unsigned) {
    const auto& m = std::get<ScatteringZipper>(*cfg.model);
    const std::vector<double> angles = cfg.grid.empty() ? std::vector<double>{0.0} : cfg.grid;
    TaskOutput out;
    out.table.header = {"arg_z", "samples", "max_lorentz_residual", "max_factorization_residual",
                        "max_cayley_residual", "closure_dim", "target_dim", "verdict"};
    json rows = json::array();
    bool ok = true;
    for (double a : angles) {
        const cplx z = std::polar(1.0, a);
        double lor = 0, fac = 0, cay = 0;
        for (int s = 0; s < cfg.samples; ++s) {
            const auto ph = draw_zipper_phases(SeedSpec{cfg.seed, 0, 0}, s, m.D);
            const auto t = zipper_transfer(m, z, ph);
            lor = std::max(lor, group_residual(t.matrix, t.group));
            fac = std::max(fac, zipper_factorization_residual(m, z, ph));
            cay = std::max(cay, group_residual(cayley_realify(t.matrix), GroupTag::symplectic(2 * m.D)));
        }
        const auto rep = zipper_lie_closure(m.D, z, m.alpha, cfg.samples, cfg.svd_tol);
        out.table.rows.push_back({a, static_cast<long long>(cfg.samples), lor, fac, cay,
                                  static_cast<long long>(rep.closure_dim), static_cast<long long>(rep.target_dim),
                                  to_string(rep.verdict)});
        json j = closure_json(rep);
        j["arg_z"] = a;
        j["max_lorentz_residual"] = lor;
        j["max_factorization_residual"] = fac;
        j["max_cayley_residual"] = cay;
        rows.push_back(j);
        ok = ok && rep.verdict == LieClosureReport::Verdict::Full;
    }
    out.json = json{{"task", "zipper-check"}, {"samples", cfg.samples}, {"rows", rows}}.dump(2);
    out.summary = std::string("zipper-check: closure ") + (ok ? "Full" : "not Full") + " at " +
                  std::to_string(angles.size()) + " point(s)";
    return out;
}

TaskOutput thouless(const RunConfig& cfg, unsigned threads) {
    const auto rep = thouless_residual(*cfg.model, cfg.grid, cfg.L, cfg.realizations, cfg.seed, lyap_options(cfg, threads));
    TaskOutput out;
    out.table.header = {"E", "gamma", "sigma", "conv", "conv_sigma", "residual"};
    for (const auto& r : rep.rows) out.table.rows.push_back({r.E, r.gamma, r.gamma_sigma, r.conv, r.conv_sigma, r.residual});
    out.json = json{{"task", "thouless"}, {"alpha", rep.alpha}, {"alpha_ci", rep.alpha_ci}, {"rms", rep.rms},
                    {"sensitivity", rep.sensitivity}, {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = "thouless: alpha = " + pm(rep.alpha, rep.alpha_ci / 1.96) + ", rms = " + format_double17(rep.rms);
    return out;
}

TaskOutput wegner(const RunConfig& cfg, unsigned threads) {
    const auto rows = wegner_probe(*cfg.model, cfg.wegner_energy, cfg.L_list, cfg.kappa, cfg.beta, cfg.trials, cfg.seed,
                                   cfg.xi, threads);
    TaskOutput out;
    out.table.header = {"L", "kappa", "beta", "threshold", "hits", "trials", "probability", "ci_lo", "ci_hi", "reference"};
    for (const auto& r : rows)
        out.table.rows.push_back({static_cast<long long>(r.L), r.kappa, r.beta, r.threshold, static_cast<long long>(r.hits),
                                  static_cast<long long>(r.realizations), r.probability, r.ci_lo, r.ci_hi, r.reference});
    const bool trend = wegner_non_increasing(rows);
    out.json = json{{"task", "wegner"}, {"energy", cfg.wegner_energy}, {"non_increasing", trend},
                    {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = std::string("wegner: ") + std::to_string(rows.size()) + " box sizes, trend " +
                  (trend ? "non-increasing" : "increasing") + " at 95% Wilson CI";
    return out;
}

TaskOutput eigenmode(const RunConfig& cfg, unsigned threads) {
    const auto rep = eigenmode_decay(*cfg.model, cfg.L, {cfg.window_lo, cfg.window_hi}, cfg.realizations, cfg.seed,
                                     lyap_options(cfg, threads));
    TaskOutput out;
    out.table.header = {"energy", "rate", "points"};
    for (const auto& md : rep.modes) out.table.rows.push_back({md.energy, md.rate, static_cast<long long>(md.points)});
    out.json = json{{"task", "eigenmode"}, {"median_rate", rep.median_rate}, {"gamma_D", rep.gamma_D},
                    {"gamma_sigma", rep.gamma_sigma}, {"localized", rep.localized},
                    {"modes_examined", rep.modes_examined}, {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = "eigenmode: median rate " + format_double17(rep.median_rate) + " vs gamma_D " +
                  pm(rep.gamma_D, rep.gamma_sigma) + " over " + std::to_string(rep.modes.size()) + " modes";
    return out;
}

TaskOutput transport(const RunConfig& cfg, unsigned threads) {
    const auto rep = transport_probe(*cfg.model, cfg.L, cfg.t_grid, cfg.realizations, cfg.seed, threads);
    TaskOutput out;
    out.table.header = {"t", "m2", "m2_sigma"};
    for (std::size_t k = 0; k < rep.t.size(); ++k) out.table.rows.push_back({rep.t[k], rep.m2[k], rep.m2_sigma[k]});
    out.json = json{{"task", "transport"}, {"sup_m2", rep.sup_m2}, {"kappa_hat", rep.kappa_hat},
                    {"guard_mass", rep.guard_mass}, {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = "transport: sup m2 = " + format_double17(rep.sup_m2) + ", tail exponent " + format_double17(rep.kappa_hat);
    return out;
}

TaskOutput selftest(const RunConfig&, unsigned threads) {
    const auto checks = run_selftest(threads);
    TaskOutput out;
    out.table.header = {"check", "pass", "detail"};
    int passed = 0;
    for (const auto& c : checks) {
        out.table.rows.push_back({c.name, static_cast<long long>(c.pass ? 1 : 0), c.detail});
        passed += c.pass;
    }
    out.ok = passed == static_cast<int>(checks.size());
    out.json = json{{"task", "selftest"}, {"passed", passed}, {"total", checks.size()}, {"rows", table_json(out.table)}}
                   .dump(2);
    out.summary = "selftest: " + std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks passed";
    return out;
}

}  // namespace

TaskOutput execute(const RunConfig& cfg, unsigned threads) {
    validate_config(cfg);
    switch (cfg.task) {
    case Task::LyapScan: return lyap_scan(cfg, threads);
    case Task::Ids: return ids(cfg, threads);
    case Task::Furstenberg: return furstenberg(cfg, threads);
    case Task::ZipperCheck: return zipper_check(cfg, threads);
    case Task::Thouless: return thouless(cfg, threads);
    case Task::Wegner: return wegner(cfg, threads);
    case Task::Eigenmode: return eigenmode(cfg, threads);
    case Task::Transport: return transport(cfg, threads);
    case Task::Selftest: return selftest(cfg, threads);
    }
    fail(ErrorKind::ValidationError, "unknown task");
}

std::string to_csv(const Table& t) {
    std::string s;
    for (std::size_t k = 0; k < t.header.size(); ++k) s += (k ? "," : "") + t.header[k];
    s += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) s += ",";
            std::visit(
                [&s](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, double>)
                        s += format_double17(v);
                    else if constexpr (std::is_same_v<T, long long>)
                        s += std::to_string(v);
                    else
                        s += v;
                },
                row[k]);
        }
        s += "\n";
    }
    return s;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorKind::ValidationError, "cannot open output '" + tmp + "'");
        f << content;
        f.flush();
        if (!f) {
            f.close();
            std::remove(tmp.c_str());
            fail(ErrorKind::ValidationError, "write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::remove(tmp.c_str());
        fail(ErrorKind::ValidationError, "cannot rename output to '" + path + "': " + ec.message());
    }
}

int run(const RunConfig& cfg, const std::string& out_path, unsigned threads, std::ostream& log) {
    try {
        const TaskOutput out = execute(cfg, threads);
        if (!out_path.empty())
            write_atomic(out_path, cfg.format == OutputFormat::Csv ? to_csv(out.table) : out.json + "\n");
        log << out.summary << "\n";
        return out.ok ? 0 : 2;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return is_config_error(e.kind()) ? 1 : 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace q1d
