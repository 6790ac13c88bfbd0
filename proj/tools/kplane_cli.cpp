// Command-line surface: kernel tables, residual reports, identity checks,
// inversion sweeps, and the infeasibility diagnostic. Every run writes a CSV
// table (primary), a JSON mirror, and a run manifest next to --out.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kplane/abel.hpp"
#include "kplane/kernels.hpp"
#include "kplane/numerics.hpp"
#include "kplane/transforms.hpp"

using json = nlohmann::json;
using namespace kplane;

namespace {

constexpr const char* tool_version = "1.0.0";
constexpr int exit_ok = 0;
constexpr int exit_tolerance = 1;
constexpr int exit_usage = 2;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GlobalOpts {
    std::string out = "kplane_run";
    std::string format = "csv";
    std::uint64_t seed = 0;
    double tol = 1e-6;
    bool quiet = false;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One output table: a meta line, a header, and string-formatted rows.
struct Table {
    std::string meta;  // key=value pairs, emitted as a CSV comment line
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_csv(const Table& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    if (!table.meta.empty()) out << "# " << table.meta << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

void write_json_mirror(const Table& table, const std::string& path) {
    json j;
    j["meta"] = table.meta;
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

void write_manifest(const std::string& command,
                    const std::map<std::string, std::string>& parameters,
                    const GlobalOpts& opts, const std::vector<std::string>& outputs,
                    const std::string& path) {
    json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seed"] = opts.seed;
    j["tool_version"] = tool_version;
    j["timestamp"] = iso8601_now();
    j["output_paths"] = outputs;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << j.dump(2) << "\n";
}

void emit(const Table& table, const std::string& command,
          const std::map<std::string, std::string>& parameters, const GlobalOpts& opts) {
    const std::string csv_path = opts.out + ".csv";
    const std::string json_path = opts.out + ".json";
    const std::string manifest_path = opts.out + ".manifest.json";
    write_csv(table, csv_path);
    write_json_mirror(table, json_path);
    write_manifest(command, parameters, opts, {csv_path, json_path}, manifest_path);
    if (opts.quiet) return;
    if (opts.format == "json") {
        std::ifstream in(json_path);
        std::cout << in.rdbuf();
    } else {
        std::ifstream in(csv_path);
        std::cout << in.rdbuf();
    }
}

std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0)) throw usage_error("--r-min must be positive (log-spaced grid)");
    if (!(hi > lo)) throw usage_error("--r-max must exceed --r-min");
    if (points < 2) throw usage_error("--samples must be at least 2");
    std::vector<double> grid;
    const double step = (std::log(hi) - std::log(lo)) / (points - 1);
    for (int i = 0; i < points; ++i) grid.push_back(std::exp(std::log(lo) + i * step));
    return grid;
}

Eigen::VectorXd parse_vector(const std::string& text, int n) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    if (static_cast<int>(values.size()) != n)
        throw usage_error("--x needs " + std::to_string(n) + " comma-separated reals");
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = values[i];
    return x;
}

struct FamilyChoice {
    PiecewiseRadialKernel kernel;
    RadialProfile profile;
    std::string name;
};

// Resolve --family/--psi into a matched (w, psi) pair; the indicator
// mollifier with k >= 2 is refused with the obstruction constant.
FamilyChoice resolve_family(const Dims& dims, const std::string& family,
                            const std::string& psi_override) {
    std::string psi = psi_override;
    if (psi.empty()) psi = (family == "theoremA") ? "indicator" : "powertail";
    if (psi == "indicator" && dims.k >= 2) {
        const double obstruction = indicator_infeasibility(dims);
        throw usage_error(
            "no reconstruction kernel exists for the indicator mollifier with k >= 2: "
            "the residual tends to the nonzero obstruction constant " +
            fmt17(obstruction) + " instead of vanishing");
    }
    FamilyChoice choice;
    if (family == "theoremA") {
        if (dims.k != 1) throw usage_error("--family theoremA requires k = 1");
        choice.kernel = w_theoremA_kernel(dims);
        choice.profile = make_profile(ProfileFamily::IndicatorBall, dims);
    } else if (family == "theoremB") {
        choice.kernel = w_theoremB_build(dims);
        choice.profile = make_profile(psi == "indicator"
                                          ? ProfileFamily::IndicatorBall
                                          : ProfileFamily::PowerTail,
                                      dims);
    } else {
        throw usage_error("--family must be theoremA or theoremB");
    }
    choice.name = family;
    return choice;
}

Phantom resolve_phantom(const std::string& kind, int n, double sigma, double radius,
                        double height) {
    Phantom phantom;
    phantom.n = n;
    phantom.sigma = sigma;
    phantom.radius = radius;
    phantom.height = height;
    if (kind == "gaussian")
        phantom.kind = PhantomKind::Gaussian;
    else if (kind == "ball")
        phantom.kind = PhantomKind::Ball;
    else
        throw usage_error("--phantom must be gaussian or ball");
    return phantom;
}

std::string meta_dims(const Dims& dims, const FamilyChoice& choice) {
    return "family=" + choice.name + " n=" + std::to_string(dims.n) +
           " k=" + std::to_string(dims.k) + " ell=" + std::to_string(dims.ell()) +
           " lambda=" + fmt17(choice.profile.lambda);
}

int cmd_kernel(const GlobalOpts& opts, int n, int k, const std::string& family,
               const std::string& psi, double r_min, double r_max, int samples) {
    const Dims dims = Dims::checked(n, k);
    const auto choice = resolve_family(dims, family, psi);
    Table table;
    table.meta = meta_dims(dims, choice);
    table.columns = {"r", "w", "psi"};
    for (double r : log_grid(r_min, r_max, samples))
        table.rows.push_back({fmt17(r), fmt17(kernel_eval(choice.kernel, r)),
                              fmt17(psi_eval(choice.profile, r))});
    emit(table, "kernel",
         {{"n", std::to_string(n)},
          {"k", std::to_string(k)},
          {"family", family},
          {"r_min", fmt17(r_min)},
          {"r_max", fmt17(r_max)},
          {"samples", std::to_string(samples)}},
         opts);
    return exit_ok;
}

int cmd_residual(const GlobalOpts& opts, int n, int k, const std::string& family,
                 const std::string& psi, double r_min, double r_max, int points) {
    const Dims dims = Dims::checked(n, k);
    const auto choice = resolve_family(dims, family, psi);
    const auto grid = residual_grid(r_min, r_max, points);
    const auto report = residual_check(choice.kernel, choice.profile, dims, grid);
    Table table;
    table.meta = meta_dims(dims, choice) + " max_abs_err=" + fmt17(report.max_abs_err);
    table.columns = {"r", "lhs", "rhs", "abs_err", "ok"};
    bool all_ok = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double err = std::abs(report.lhs[i] - report.rhs[i]);
        all_ok = all_ok && report.ok[i];
        table.rows.push_back({fmt17(grid[i]), fmt17(report.lhs[i]), fmt17(report.rhs[i]),
                              fmt17(err), report.ok[i] ? "1" : "0"});
    }
    emit(table, "residual",
         {{"n", std::to_string(n)},
          {"k", std::to_string(k)},
          {"family", family},
          {"r_min", fmt17(r_min)},
          {"r_max", fmt17(r_max)},
          {"points", std::to_string(points)},
          {"tol", fmt17(opts.tol)}},
         opts);
    const bool pass = all_ok && report.max_abs_err <= opts.tol;
    if (!pass && !opts.quiet)
        std::cerr << "residual check failed: max_abs_err = " << fmt17(report.max_abs_err)
                  << " > tol = " << fmt17(opts.tol) << "\n";
    return pass ? exit_ok : exit_tolerance;
}

int cmd_identity(const GlobalOpts& opts, int n, int k, const std::string& family,
                 const std::string& phantom_kind, double sigma, double a, int points,
                 double x_max, const std::string& engine, int samples) {
    const Dims dims = Dims::checked(n, k);
    const auto choice = resolve_family(dims, family, "");
    const Phantom phantom = resolve_phantom(phantom_kind, n, sigma, 1.0, 1.0);
    if (!(a > 0.0)) throw usage_error("--a must be positive");
    if (points < 1) throw usage_error("--points must be at least 1");

    Table table;
    table.meta = meta_dims(dims, choice) + " a=" + fmt17(a) + " engine=" + engine;
    table.columns = {"x1", "backprojection", "convolution", "abs_diff", "std_error"};
    bool pass = true;
    for (int i = 0; i < points; ++i) {
        const double xc = points == 1 ? 0.0 : x_max * i / (points - 1);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        x(0) = xc;
        const double cv = convolve_oracle(phantom, choice.profile, x, a);
        double bp, se = 0.0;
        if (engine == "mc") {
            const auto mc = backproject_mc(choice.kernel, phantom, dims, x, a, samples,
                                           opts.seed + i);
            bp = mc.estimate;
            se = mc.std_error;
            // x = 0 short-circuits the sampling layer and comes back exact
            pass = pass && std::abs(bp - cv) <= (se > 0.0 ? 3.0 * se : opts.tol);
        } else if (engine == "reduced") {
            bp = backproject_reduced(choice.kernel, phantom, dims, x, a);
            pass = pass && std::abs(bp - cv) <= opts.tol;
        } else {
            throw usage_error("--engine must be reduced or mc");
        }
        table.rows.push_back(
            {fmt17(xc), fmt17(bp), fmt17(cv), fmt17(std::abs(bp - cv)), fmt17(se)});
    }
    emit(table, "identity",
         {{"n", std::to_string(n)},
          {"k", std::to_string(k)},
          {"family", family},
          {"phantom", phantom_kind},
          {"sigma", fmt17(sigma)},
          {"a", fmt17(a)},
          {"points", std::to_string(points)},
          {"x_max", fmt17(x_max)},
          {"engine", engine},
          {"samples", std::to_string(samples)},
          {"tol", fmt17(opts.tol)}},
         opts);
    return pass ? exit_ok : exit_tolerance;
}

int cmd_invert(const GlobalOpts& opts, int n, int k, const std::string& family,
               const std::string& psi, const std::string& phantom_kind, double sigma,
               double radius, double height, const std::string& x_text, double a_start,
               double factor, int steps, const std::string& engine, int samples) {
    const Dims dims = Dims::checked(n, k);
    const auto choice = resolve_family(dims, family, psi);
    const Phantom phantom = resolve_phantom(phantom_kind, n, sigma, radius, height);
    if (steps < 1) throw usage_error("--steps must be at least 1");
    if (!(factor > 0.0 && factor < 1.0)) throw usage_error("--factor must lie in (0,1)");
    if (!(a_start > 0.0)) throw usage_error("--a-start must be positive");
    const Eigen::VectorXd x = parse_vector(x_text, n);

    const SweepEngine sweep_engine =
        engine == "mc" ? SweepEngine::MC
                       : (engine == "reduced"
                              ? SweepEngine::Reduced
                              : throw usage_error("--engine must be reduced or mc"));
    const auto sweep = invert_sweep(phantom, dims, choice.kernel, choice.profile, x,
                                    a_start, factor, steps, sweep_engine, samples,
                                    opts.seed);

    Table table;
    table.meta = meta_dims(dims, choice) + " truth=" + fmt17(phantom.value(x.norm()));
    table.columns = {"a", "estimate", "abs_err", "observed_order", "ok"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < sweep.schedule.size(); ++i) {
        const double order = i + 1 < sweep.schedule.size() && i < sweep.observed_orders.size()
                                 ? sweep.observed_orders[i]
                                 : nan;
        table.rows.push_back({fmt17(sweep.schedule[i]), fmt17(sweep.estimates[i]),
                              fmt17(sweep.errors[i]), fmt17(order),
                              sweep.ok[i] ? "1" : "0"});
    }
    emit(table, "invert",
         {{"n", std::to_string(n)},
          {"k", std::to_string(k)},
          {"family", family},
          {"phantom", phantom_kind},
          {"x", x_text},
          {"a_start", fmt17(a_start)},
          {"factor", fmt17(factor)},
          {"steps", std::to_string(steps)},
          {"engine", engine}},
         opts);
    return exit_ok;
}

int cmd_infeasible(const GlobalOpts& opts, int n, int k, bool all) {
    Table table;
    table.meta = "obstruction constants -Gamma((n-k)/2)/Gamma(n/2)";
    table.columns = {"n", "k", "constant", "quadrature", "abs_diff"};
    auto add = [&table](const Dims& dims) {
        const double closed = indicator_infeasibility(dims);
        const double quad = indicator_infeasibility_quadrature(dims);
        table.rows.push_back({std::to_string(dims.n), std::to_string(dims.k), fmt17(closed),
                              fmt17(quad), fmt17(std::abs(closed - quad))});
    };
    if (all) {
        for (int nn = 3; nn <= 8; ++nn)
            for (int kk = 2; kk < nn; ++kk) add(Dims::checked(nn, kk));
    } else {
        const Dims dims = Dims::checked(n, k);
        if (dims.k < 2)
            throw usage_error("no obstruction for k = 1: a matching kernel exists");
        add(dims);
    }
    emit(table, "infeasible",
         {{"n", std::to_string(n)}, {"k", std::to_string(k)}, {"all", all ? "1" : "0"}},
         opts);
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-plane convolution-backprojection toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // let global flags appear after the subcommand name

    GlobalOpts opts;
    app.add_option("--out", opts.out, "Output basename (writes .csv, .json, .manifest.json)");
    app.add_option("--format", opts.format, "Echo format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", opts.seed, "Random seed for MC engines");
    app.add_option("--tol", opts.tol, "Pass/fail tolerance");
    app.add_flag("--quiet", opts.quiet, "Suppress stdout echo");

    int n = 2, k = 1, samples = 200, points = 30, mc_samples = 20000, steps = 6;
    double r_min = 0.05, r_max = 20.0, a = 0.5, x_max = 1.5, sigma = 1.0, radius = 1.0,
           height = 1.0, a_start = 1.0, factor = 0.5;
    std::string family = "theoremA", psi, phantom = "gaussian", engine = "reduced",
                x_text = "0.5,0";
    bool all = false;

    auto* kernel_cmd = app.add_subcommand("kernel", "Tabulate a kernel/mollifier pair");
    kernel_cmd->add_option("--n", n)->required();
    kernel_cmd->add_option("--k", k)->required();
    kernel_cmd->add_option("--family", family);
    kernel_cmd->add_option("--psi", psi);
    kernel_cmd->add_option("--r-min", r_min);
    kernel_cmd->add_option("--r-max", r_max);
    kernel_cmd->add_option("--samples", samples);

    auto* residual_cmd =
        app.add_subcommand("residual", "Check the kernel against its integral equation");
    residual_cmd->add_option("--n", n)->required();
    residual_cmd->add_option("--k", k)->required();
    residual_cmd->add_option("--family", family);
    residual_cmd->add_option("--psi", psi);
    residual_cmd->add_option("--r-min", r_min);
    residual_cmd->add_option("--r-max", r_max);
    residual_cmd->add_option("--points", points);

    auto* identity_cmd =
        app.add_subcommand("identity", "Backprojection vs mollified convolution");
    identity_cmd->add_option("--n", n)->required();
    identity_cmd->add_option("--k", k)->required();
    identity_cmd->add_option("--family", family);
    identity_cmd->add_option("--phantom", phantom);
    identity_cmd->add_option("--sigma", sigma);
    identity_cmd->add_option("--a", a);
    identity_cmd->add_option("--points", points);
    identity_cmd->add_option("--x-max", x_max);
    identity_cmd->add_option("--engine", engine);
    identity_cmd->add_option("--samples", mc_samples);

    auto* invert_cmd = app.add_subcommand("invert", "Inversion sweep over shrinking scales");
    invert_cmd->add_option("--n", n)->required();
    invert_cmd->add_option("--k", k)->required();
    invert_cmd->add_option("--family", family);
    invert_cmd->add_option("--psi", psi);
    invert_cmd->add_option("--phantom", phantom);
    invert_cmd->add_option("--sigma", sigma);
    invert_cmd->add_option("--radius", radius);
    invert_cmd->add_option("--height", height);
    invert_cmd->add_option("--x", x_text);
    invert_cmd->add_option("--a-start", a_start);
    invert_cmd->add_option("--factor", factor);
    invert_cmd->add_option("--steps", steps);
    invert_cmd->add_option("--engine", engine);
    invert_cmd->add_option("--samples", mc_samples);

    auto* infeasible_cmd =
        app.add_subcommand("infeasible", "Obstruction constants for the indicator mollifier");
    infeasible_cmd->add_option("--n", n);
    infeasible_cmd->add_option("--k", k);
    infeasible_cmd->add_flag("--all", all);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (kernel_cmd->parsed())
            return cmd_kernel(opts, n, k, family, psi, r_min, r_max, samples);
        if (residual_cmd->parsed())
            return cmd_residual(opts, n, k, family, psi, r_min, r_max, points);
        if (identity_cmd->parsed())
            return cmd_identity(opts, n, k, family, phantom, sigma, a, points, x_max,
                                engine, mc_samples);
        if (invert_cmd->parsed())
            return cmd_invert(opts, n, k, family, psi, phantom, sigma, radius, height,
                              x_text, a_start, factor, steps, engine, mc_samples);
        if (infeasible_cmd->parsed()) return cmd_infeasible(opts, n, k, all);
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const accuracy_error& e) {
        std::cerr << "accuracy failure: " << e.what()
                  << " (best estimate " << fmt17(e.best_estimate()) << ")\n";
        return exit_tolerance;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
