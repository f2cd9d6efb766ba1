#pragma once

// Experiment runner behind the command-line tool: configuration, CSV writers
// and suite dispatch. Everything writes to caller-supplied streams so the
// output bytes depend only on the configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "json.hpp"

namespace vervaat::cli {

// Bad command line or configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    std::string experiment;  // suite, law or figure name depending on the subcommand
    double lambda = -1.0;
    std::size_t grid = 4096;
    std::size_t replicas = 1000;
    bool replicas_given = false;  // verify: 0 keeps each suite's default
    std::vector<double> times{0.25, 0.5, 0.75, 1.0};
    std::uint64_t seed = 20240611;
    std::string out_dir = ".";
    double alpha = 1e-3;
};

inline void check_grid_size(std::size_t N) {
    const bool pow2 = N && (N & (N - 1)) == 0;
    if (!pow2 || N < 16 || N > 65536) throw UsageError("grid must be a power of two between 16 and 65536");
}

inline void check_replicas(std::size_t R) {
    if (R < 1) throw UsageError("replicas must be >= 1");
}

// Flat JSON object; keys mirror the long flag names.
inline void apply_config(ExperimentConfig& c, const nlohmann::json& j) {
    if (!j.is_object()) throw UsageError("config: expected a flat JSON object");
    for (const auto& [k, v] : j.items()) {
        try {
            if (k == "experiment" || k == "suite" || k == "law" || k == "name") c.experiment = v.get<std::string>();
            else if (k == "lambda") c.lambda = v.get<double>();
            else if (k == "grid") c.grid = v.get<std::size_t>();
            else if (k == "replicas" || k == "reps") {
                c.replicas = v.get<std::size_t>();
                c.replicas_given = true;
            } else if (k == "times") c.times = v.get<std::vector<double>>();
            else if (k == "seed") c.seed = v.get<std::uint64_t>();
            else if (k == "out_dir") c.out_dir = v.get<std::string>();
            else if (k == "alpha") c.alpha = v.get<double>();
            else throw UsageError("config: unknown key '" + k + "'");
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("config: bad value for '" + k + "': " + e.what());
        }
    }
}

inline ExperimentConfig load_config_file(const std::string& path, ExperimentConfig c = {}) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config: " + std::string(e.what()));
    }
    apply_config(c, j);
    return c;
}

// VERVAAT_SEED overrides the configured seed (flags override both).
inline void apply_seed_env(ExperimentConfig& c) {
    if (const char* s = std::getenv("VERVAAT_SEED")) {
        try {
            std::size_t end = 0;
            c.seed = std::stoull(s, &end);
            if (s[end] != '\0') throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw UsageError("VERVAAT_SEED must be a nonnegative integer");
        }
    }
}

// ---- CSV helpers -------------------------------------------------------------

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string fmt_opt(double x) { return std::isfinite(x) ? fmt(x) : std::string{}; }

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
        os_ << '\n';
    }

private:
    std::ostream& os_;
};

// ---- sample ------------------------------------------------------------------

struct Drawn {
    GridPath path;
    std::vector<double> latent;
};

struct LawSpec {
    std::vector<std::string> latent;
    std::function<Drawn(const ExperimentConfig&, RngStream&)> draw;
};

inline const std::map<std::string, LawSpec>& sample_laws() {
    auto neg = [](double l, const char* who) {
        if (!(l < 0.0)) throw UsageError(std::string(who) + " requires --lambda < 0");
    };
    static const std::map<std::string, LawSpec> m{
        {"bm", {{}, [](const ExperimentConfig& c, RngStream& r) { return Drawn{sample_bm(c.grid, 1.0, r), {}}; }}},
        {"bridge", {{}, [](const ExperimentConfig& c, RngStream& r) { return Drawn{sample_bridge(c.grid, 1.0, c.lambda, r), {}}; }}},
        {"excursion", {{}, [](const ExperimentConfig& c, RngStream& r) { return Drawn{sample_excursion(c.grid, 1.0, r), {}}; }}},
        {"meander", {{}, [](const ExperimentConfig& c, RngStream& r) { return Drawn{sample_meander(c.grid, 1.0, r), {}}; }}},
        {"bessel3", {{}, [](const ExperimentConfig& c, RngStream& r) { return Drawn{sample_bessel3(c.grid, 1.0, r), {}}; }}},
        {"fp-bridge", {{}, [=](const ExperimentConfig& c, RngStream& r) {
             neg(c.lambda, "fp-bridge");
             return Drawn{sample_fp_bridge(c.grid, 1.0, c.lambda, r), {}};
         }}},
        {"vbridge-neg", {{"Z"}, [=](const ExperimentConfig& c, RngStream& r) {
             neg(c.lambda, "vbridge-neg");
             auto s = build_vervaat_bridge_neg(c.lambda, c.grid, r);
             return Drawn{std::move(s.path), {s.z}};
         }}},
        {"vbridge-pos", {{"Zhat"}, [](const ExperimentConfig& c, RngStream& r) {
             if (!(c.lambda > 0.0)) throw UsageError("vbridge-pos requires --lambda > 0");
             auto s = build_vervaat_bridge_pos(c.lambda, c.grid, r);
             return Drawn{std::move(s.path), {s.z}};
         }}},
        {"vbridge-direct", {{"A", "Z"}, [](const ExperimentConfig& c, RngStream& r) {
             if (c.lambda == 0.0) throw UsageError("vbridge-direct requires --lambda != 0");
             auto s = direct_vervaat_bridge(c.lambda, c.grid, r);
             return Drawn{std::move(s.path), {s.a, s.z}};
         }}},
        {"vbridge-cond", {{"Z", "attempts"}, [=](const ExperimentConfig& c, RngStream& r) {
             neg(c.lambda, "vbridge-cond");
             auto s = conditioned_above_line(c.lambda, c.grid, r);
             return Drawn{std::move(s.path), {s.z, double(s.attempts)}};
         }}},
        {"vb", {{"A", "T0"}, [](const ExperimentConfig& c, RngStream& r) {
             auto s = build_vb(c.grid, r);
             return Drawn{std::move(s.path), {s.a, s.z}};
         }}},
        {"vb-direct", {{"A", "T0"}, [](const ExperimentConfig& c, RngStream& r) {
             auto s = direct_vb(c.grid, r);
             return Drawn{std::move(s.path), {s.a, s.z}};
         }}},
    };
    return m;
}

// One row per replica: latent variables then values at the configured times.
// With full_paths, long format (replica, i, t, value) instead.
inline void write_samples(std::ostream& os, const std::string& law, const ExperimentConfig& c, bool full_paths = false) {
    const auto& laws = sample_laws();
    const auto it = laws.find(law);
    if (it == laws.end()) throw UsageError("unknown law '" + law + "'");
    check_grid_size(c.grid);
    check_replicas(c.replicas);
    for (double t : c.times)
        if (!(t >= 0.0 && t <= 1.0)) throw UsageError("times must lie in [0,1]");
    const auto& spec = it->second;
    {
        RngStream probe(c.seed, 0);
        spec.draw(c, probe);  // surfaces argument errors before any output
    }
    const auto draws = map_replicas(c.replicas, c.seed, [&](std::size_t, RngStream& r) { return spec.draw(c, r); });
    CsvWriter w(os);
    if (full_paths) {
        w.row({"replica", "i", "t", "value"});
        for (std::size_t k = 0; k < draws.size(); ++k) {
            const auto& p = draws[k].path;
            for (std::size_t i = 0; i <= p.steps(); ++i)
                w.row({std::to_string(k), std::to_string(i), fmt(p.time(i)), fmt(p.values[i])});
        }
        return;
    }
    std::vector<std::string> head{"replica"};
    for (const auto& l : spec.latent) head.push_back(l);
    for (double t : c.times) head.push_back("v_" + fmt(t));
    w.row(head);
    for (std::size_t k = 0; k < draws.size(); ++k) {
        std::vector<std::string> cells{std::to_string(k)};
        for (double x : draws[k].latent) cells.push_back(fmt_opt(x));
        for (double t : c.times) cells.push_back(fmt(draws[k].path.value_at(t)));
        w.row(cells);
    }
}

// ---- laws --------------------------------------------------------------------

// Grid on (0,1) packed towards both ends: t = u^4 / (u^4 + (1-u)^4) at cell midpoints.
inline std::vector<double> unit_grid(std::size_t points) {
    std::vector<double> t(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double u = (double(i) + 0.5) / double(points);
        const double a = std::pow(u, 4), b = std::pow(1.0 - u, 4);
        t[i] = a / (a + b);
    }
    return t;
}

inline void write_law(std::ostream& os, const std::string& name, const ExperimentConfig& c, std::size_t points, double t) {
    if (points < 2) throw UsageError("points must be >= 2");
    CsvWriter w(os);
    auto dist = [&](const ClosedFormLaw& law, const std::vector<double>& xs) {
        w.row({"x", "pdf", "cdf"});
        for (double x : xs) w.row({fmt(x), fmt(law.pdf(x)), fmt(law.cdf(x))});
    };
    auto uniform = [&](double lo, double hi) {
        std::vector<double> xs(points);
        for (std::size_t i = 0; i < points; ++i) xs[i] = lo + (hi - lo) * double(i) / double(points - 1);
        return xs;
    };
    try {
        if (name == "fz") dist(fz(c.lambda), unit_grid(points));
        else if (name == "fz-hat") dist(fz_hat(c.lambda), unit_grid(points));
        else if (name == "fa") dist(fa(c.lambda), unit_grid(points));
        else if (name == "fztilde") dist(fztilde(c.lambda), unit_grid(points));
        else if (name == "meander") dist(meander_marginal(t), uniform(0.0, 8.0 * std::sqrt(t)));
        else if (name == "end-given-t0") dist(end_given_t0(t), uniform(-8.0 * std::sqrt(1.0 - t), 0.0));
        else if (name == "slope-cdf") {
            w.row({"a", "cdf"});
            for (double a : uniform(c.lambda, 0.0)) w.row({fmt(a), fmt(slope_cdf(c.lambda, std::min(a, 0.0)))});
        } else if (name == "vb-moments") {
            w.row({"t", "mean", "second", "mean_a_gt", "mean_a_le", "second_a_gt", "second_a_le"});
            for (double s : uniform(0.0, 1.0)) {
                const auto m = vb_moments(s);
                w.row({fmt(s), fmt(m.mean), fmt(m.second), fmt(m.mean_a_gt), fmt(m.mean_a_le), fmt(m.second_a_gt),
                       fmt(m.second_a_le)});
            }
        } else if (name == "meander-moments") {
            w.row({"t", "mean", "second", "cross"});
            for (double s : uniform(0.0, 1.0)) {
                const auto m = meander_moments(s);
                w.row({fmt(s), fmt(m.mean), fmt(m.second), fmt(m.cross)});
            }
        } else
            throw UsageError("unknown law '" + name + "'");
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

// ---- transform -----------------------------------------------------------------

// Reads a path CSV (header, values in the last column) sampled on a uniform grid.
inline GridPath read_path_csv(std::istream& in, double duration) {
    std::string line;
    if (!std::getline(in, line)) throw UsageError("transform: empty input");
    std::vector<double> v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.find_last_of(',');
        const std::string cell = pos == std::string::npos ? line : line.substr(pos + 1);
        try {
            v.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw UsageError("transform: not a number: '" + cell + "'");
        }
    }
    if (v.size() < 2) throw UsageError("transform: need at least two values");
    return GridPath(duration, std::move(v));
}

inline void write_transform(std::istream& in, std::ostream& os, const std::string& op, double u, double duration,
                            std::uint64_t seed) {
    const auto p = read_path_csv(in, duration);
    CsvWriter w(os);
    auto emit = [&](const GridPath& q, const std::string& col) {
        w.row({"t", col});
        for (std::size_t i = 0; i <= q.steps(); ++i) w.row({fmt(q.time(i)), fmt(q.values[i])});
    };
    try {
        if (op == "vervaat") emit(vervaat(p).path, "vervaat");
        else if (op == "vervaat-refined") {
            RngStream rng(seed, 0);
            emit(vervaat_refined(p, rng).path, "vervaat");
        } else if (op == "shift") emit(shift(p, u), "shift");
        else if (op == "quantile") emit(quantile_transform_bm(p), "quantile");
        else if (op == "minorant") emit(minorant_path(convex_minorant(p), p), "minorant");
        else
            throw UsageError("unknown transform '" + op + "'");
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
}

// ---- enumerate -------------------------------------------------------------------

inline std::string steps_string(const Walk& w) {
    std::string s;
    for (int j = 0; j < w.size(); ++j) s += w.step(j) > 0 ? '+' : '-';
    return s;
}

inline std::string positions_string(const Walk& w) {
    std::string s;
    for (int x : w.positions()) s += (s.empty() ? "" : " ") + std::to_string(x);
    return s;
}

// what: bridges (one row per walk with its transform) or pmf (exact law of Z).
inline void write_enumeration(std::ostream& os, int n, int a, const std::string& what) {
    CsvWriter w(os);
    try {
        if (what == "bridges") {
            check_enumeration_size(n, 20, "enumerate");
            w.row({"steps", "vervaat", "k", "quantile", "first_minus_one"});
            for (const auto& b : enumerate_bridges(n, a)) {
                const auto v = vervaat_walk(b);
                w.row({steps_string(b), positions_string(v.walk), std::to_string(v.k), positions_string(quantile_walk(b)),
                       std::to_string(first_visit(v.walk, -1))});
            }
        } else if (what == "pmf") {
            const auto p = z_pmf(n, a);
            w.row({"l", "mass", "probability"});
            for (std::size_t i = 0; i < p.support.size(); ++i)
                w.row({std::to_string(p.support[i]), p.masses[i].str(), fmt(p.masses[i].convert_to<double>())});
        } else
            throw UsageError("unknown enumeration '" + what + "'");
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    } catch (const ResourceLimit& e) {
        throw UsageError(e.what());
    }
}

// ---- verify ----------------------------------------------------------------------

inline std::string report_line(const TestReport& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS " : "FAIL ") << r.name << "  stat=" << std::setprecision(4) << r.statistic;
    os << " p=" << (r.p_value ? num(*r.p_value) : std::string("-"));
    if (!r.notes.empty()) os << "  " << r.notes;
    if (r.informational) os << " [info]";
    return os.str();
}

inline void write_report_csv(std::ostream& os, const std::vector<TestReport>& rs) {
    CsvWriter w(os);
    w.row({"name", "value", "target", "statistic", "p_value", "threshold", "pass", "informational"});
    for (const auto& r : rs) {
        std::string name = r.name;
        for (auto& ch : name)
            if (ch == ',') ch = ';';
        w.row({name, fmt_opt(r.value), fmt_opt(r.target), fmt_opt(r.statistic), r.p_value ? fmt(*r.p_value) : "",
               fmt(r.threshold), r.pass ? "1" : "0", r.informational ? "1" : "0"});
    }
}

// Slope-cdf comparison table of the hull suite.
inline void write_slope_csv(std::ostream& os, const std::vector<TestReport>& rs) {
    CsvWriter w(os);
    w.row({"a", "empirical", "closed_form"});
    const std::string key = "last slope cdf at a=";
    for (const auto& r : rs)
        if (r.name.rfind(key, 0) == 0 && r.name.find(',') == std::string::npos)
            w.row({r.name.substr(key.size()), fmt(r.value), fmt(r.target)});
}

struct VerifyResult {
    int exit_code = 0;
    std::vector<TestReport> reports;
};

// Runs one suite; 0 when every gating check passes (experimental suites always 0).
inline VerifyResult run_verify(const ExperimentConfig& c, std::ostream& log) {
    const Suite* s = find_suite(c.experiment);
    if (!s) throw UsageError("unknown suite '" + c.experiment + "'");
    check_grid_size(c.grid);
    SuiteConfig sc;
    sc.seed = c.seed;
    sc.grid = c.grid;
    sc.replicas = c.replicas_given ? c.replicas : 0;
    sc.alpha = c.alpha;
    if (c.replicas_given) check_replicas(c.replicas);
    const auto run = run_suite(*s, sc);
    VerifyResult out{0, run.reports};
    for (const auto& r : run.reports) log << report_line(r) << '\n';
    const bool ok = suite_passed(run.reports);
    log << (ok ? "SUITE PASS " : "SUITE FAIL ") << s->name << "  " << std::fixed << std::setprecision(1) << run.seconds
        << "s" << std::defaultfloat << '\n';
    if (!ok && !s->experimental) {
        out.exit_code = 1;
        for (const auto& r : run.reports)
            if (!r.pass && !r.informational) log << "failed: " << r.name << '\n';
    }
    return out;
}

// ---- plot data -------------------------------------------------------------------

// Writes figure CSVs into c.out_dir and returns their paths. Figures:
//   1 negative-endpoint bridge with its Z marker, 2 positive-endpoint bridge
//   with Zhat, 3 lattice Vervaat bridge of length 50 with its first -1 visit,
//   4 |X| - L^0(X) built from a standard bridge X, next to a direct V(B^{lambda,br}).
inline std::vector<std::string> write_plot_data(const ExperimentConfig& c, const std::vector<int>& figures) {
    namespace fs = std::filesystem;
    check_grid_size(c.grid);
    fs::create_directories(c.out_dir);
    std::vector<std::string> files;
    auto open = [&](const std::string& name) {
        const auto path = (fs::path(c.out_dir) / name).string();
        files.push_back(path);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw UsageError("cannot write " + path);
        return f;
    };
    const double lneg = c.lambda < 0.0 ? c.lambda : -std::abs(c.lambda);
    const double lpos = std::abs(c.lambda) > 0.0 ? std::abs(c.lambda) : 1.0;
    for (int fig : figures) {
        RngStream rng(c.seed, std::uint64_t(fig));
        if (fig == 1 || fig == 2) {
            const auto s = fig == 1 ? build_vervaat_bridge_neg(lneg < 0.0 ? lneg : -1.0, c.grid, rng)
                                    : build_vervaat_bridge_pos(lpos, c.grid, rng);
            auto f = open(fig == 1 ? "fig1_excursion_first_passage.csv" : "fig2_bessel_bridge_excursion.csv");
            CsvWriter w(f);
            w.row({"t", "value", fig == 1 ? "Z" : "Zhat"});
            for (std::size_t i = 0; i <= s.path.steps(); ++i) w.row({fmt(s.path.time(i)), fmt(s.path.values[i]), fmt(s.z)});
        } else if (fig == 3) {
            const int n = 50, a = -6;
            const auto b = sample_bridge_walk(n, a, rng);
            const auto v = vervaat_walk(b);
            const int z = first_visit(v.walk, -1);
            const auto pw = b.positions(), pv = v.walk.positions();
            auto f = open("fig3_lattice_vervaat_bridge.csv");
            CsvWriter w(f);
            w.row({"j", "walk", "vervaat", "Z"});
            for (int j = 0; j <= n; ++j) w.row({std::to_string(j), std::to_string(pw[j]), std::to_string(pv[j]), std::to_string(z)});
        } else if (fig == 4) {
            const auto x = sample_bridge(c.grid, 1.0, 0.0, rng);
            const double eps = default_local_time_eps(c.grid);
            std::vector<double> lt(x.values.size(), 0.0);
            for (std::size_t i = 1; i < lt.size(); ++i)
                lt[i] = lt[i - 1] + (std::abs(x.values[i - 1]) < eps ? x.dt() / (2.0 * eps) : 0.0);
            const double lambda = -std::max(lt.back(), 1e-3);
            const auto vb = direct_vervaat_bridge(lambda, c.grid, rng);
            auto f = open("fig4_bridge_construction.csv");
            CsvWriter w(f);
            w.row({"t", "bridge", "local_time", "constructed", "vervaat_bridge", "lambda"});
            for (std::size_t i = 0; i <= x.steps(); ++i)
                w.row({fmt(x.time(i)), fmt(x.values[i]), fmt(lt[i]), fmt(std::abs(x.values[i]) - lt[i]),
                       fmt(vb.path.values[i]), fmt(lambda)});
        } else
            throw UsageError("unknown figure " + std::to_string(fig));
    }
    return files;
}

}  // namespace vervaat::cli
