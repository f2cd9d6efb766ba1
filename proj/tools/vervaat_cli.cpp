// vervaat: sample, transform, enumerate, evaluate laws, run suites, dump figure data.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "vervaat/cli.hpp"

using namespace vervaat;
using namespace vervaat::cli;

namespace {

struct Flags {
    std::string config;
    std::optional<double> lambda;
    std::optional<std::size_t> grid, replicas;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> alpha;
    std::vector<double> times;
};

void add_common(CLI::App* app, Flags& f, bool with_times) {
    app->add_option("--config", f.config, "flat JSON config file");
    app->add_option("--lambda", f.lambda, "endpoint lambda");
    app->add_option("--grid,-N", f.grid, "grid steps, power of two in [16, 65536]");
    app->add_option("--reps,--replicas", f.replicas, "replicas");
    app->add_option("--seed", f.seed, "master seed");
    app->add_option("--out-dir", f.out_dir, "output directory");
    app->add_option("--alpha", f.alpha, "per-test significance level");
    if (with_times) app->add_option("--times", f.times, "evaluation times in [0,1]")->delimiter(',');
}

// default < config file < VERVAAT_SEED < flags
ExperimentConfig resolve(const Flags& f) {
    ExperimentConfig c;
    if (!f.config.empty()) c = load_config_file(f.config, c);
    apply_seed_env(c);
    if (f.lambda) c.lambda = *f.lambda;
    if (f.grid) c.grid = *f.grid;
    if (f.replicas) c.replicas = *f.replicas, c.replicas_given = true;
    if (f.seed) c.seed = *f.seed;
    if (f.out_dir) c.out_dir = *f.out_dir;
    if (f.alpha) c.alpha = *f.alpha;
    if (!f.times.empty()) c.times = f.times;
    return c;
}

// Writes to the file if given, stdout otherwise.
template <class F>
void to_output(const std::string& path, F write) {
    if (path.empty() || path == "-") return write(std::cout);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vervaat bridges: simulation, exact laws and checks"};
    app.require_subcommand(1);
    Flags f;
    std::string output;

    auto* sample = app.add_subcommand("sample", "sample paths of a law; one CSV row per replica");
    std::string law = "vbridge-neg";
    bool long_format = false;
    sample->add_option("--law", law, "bm|bridge|excursion|meander|bessel3|fp-bridge|vbridge-neg|vbridge-pos|"
                                     "vbridge-direct|vbridge-cond|vb|vb-direct");
    sample->add_flag("--paths", long_format, "long format: every grid point of every replica");
    sample->add_option("--output,-o", output, "CSV file (default stdout)");
    add_common(sample, f, true);

    auto* transform = app.add_subcommand("transform", "apply a path transform to a CSV path on a uniform grid");
    std::string op = "vervaat", input;
    double u = 0.0, duration = 1.0;
    transform->add_option("--op", op, "vervaat|vervaat-refined|shift|quantile|minorant");
    transform->add_option("--input,-i", input, "CSV with a header; last column holds the values (default stdin)");
    transform->add_option("--u", u, "shift amount");
    transform->add_option("--duration", duration, "path duration");
    transform->add_option("--output,-o", output, "CSV file (default stdout)");
    add_common(transform, f, false);

    auto* enumerate = app.add_subcommand("enumerate", "exhaustive lattice bridges or the exact law of Z");
    int n = 8, a = -2;
    std::string what = "pmf";
    enumerate->add_option("--n", n, "walk length");
    enumerate->add_option("--a", a, "endpoint");
    enumerate->add_option("--what", what, "bridges|pmf");
    enumerate->add_option("--output,-o", output, "CSV file (default stdout)");

    auto* laws = app.add_subcommand("laws", "tabulate a closed-form law");
    std::string name = "fz";
    std::size_t points = 512;
    double t = 0.5;
    laws->add_option("--name", name, "fz|fz-hat|fa|fztilde|meander|end-given-t0|slope-cdf|vb-moments|meander-moments");
    laws->add_option("--points", points, "number of points");
    laws->add_option("--t", t, "time parameter for meander and end-given-t0");
    laws->add_option("--output,-o", output, "CSV file (default stdout)");
    add_common(laws, f, false);

    auto* verify = app.add_subcommand("verify", "run a check suite; exit 1 if a check fails");
    std::string suite, json_out, csv_out;
    bool list = false;
    verify->add_option("--suite", suite, "suite name");
    verify->add_flag("--list", list, "list suites");
    verify->add_option("--json", json_out, "write reports as JSON");
    verify->add_option("--csv", csv_out, "write reports as CSV (hull: slope cdf table)");
    add_common(verify, f, false);

    auto* plot = app.add_subcommand("plot-data", "write CSV data for the figures");
    std::vector<int> figures{1, 2, 3, 4};
    plot->add_option("--figure", figures, "figure numbers 1-4")->delimiter(',');
    add_common(plot, f, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        ExperimentConfig c = resolve(f);
        if (*sample) {
            to_output(output, [&](std::ostream& os) { write_samples(os, law, c, long_format); });
        } else if (*transform) {
            std::ifstream file;
            if (!input.empty()) {
                file.open(input);
                if (!file) throw UsageError("cannot open " + input);
            }
            std::istream& in = input.empty() ? std::cin : file;
            to_output(output, [&](std::ostream& os) { write_transform(in, os, op, u, duration, c.seed); });
        } else if (*enumerate) {
            to_output(output, [&](std::ostream& os) { write_enumeration(os, n, a, what); });
        } else if (*laws) {
            to_output(output, [&](std::ostream& os) { write_law(os, name, c, points, t); });
        } else if (*verify) {
            if (list) {
                for (const auto& s : suite_catalog())
                    std::cout << s.name << (s.experimental ? " [experimental]" : "") << "  " << s.description << '\n';
                return 0;
            }
            if (!suite.empty()) c.experiment = suite;
            const auto res = run_verify(c, std::cout);
            if (!json_out.empty()) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& r : res.reports) j.push_back(to_json(r));
                to_output(json_out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
            }
            if (!csv_out.empty()) {
                const bool hull = find_suite(c.experiment)->name == "hull-mc";
                to_output(csv_out, [&](std::ostream& os) {
                    hull ? write_slope_csv(os, res.reports) : write_report_csv(os, res.reports);
                });
            }
            return res.exit_code;
        } else if (*plot) {
            for (const auto& file : write_plot_data(c, figures)) std::cout << file << '\n';
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
