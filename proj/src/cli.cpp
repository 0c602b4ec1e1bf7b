#include "dropshape/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dropshape/csv.hpp"
#include "dropshape/errors.hpp"
#include "dropshape/kernels.hpp"
#include "dropshape/nonlocal.hpp"
#include "dropshape/onedim.hpp"
#include "dropshape/optimize.hpp"
#include "dropshape/parallel.hpp"
#include "dropshape/shapes2d.hpp"
#include "dropshape/spectral.hpp"

namespace dropshape {

namespace {
using nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string kernel_path;
    std::string family = "exponential";
    std::string shape_path;
    std::vector<std::string> shape_paths;
    std::string field_path;
    std::string batch_path;
    std::string dump_path;
    std::string out_path;
    std::string method = "slicing";
    double eps = kNaN;
    std::vector<double> eps_list;
    double gamma = kNaN;
    double t = kNaN;
    double amplitude = 0.1;
    int inits = 5;
    int cases = 10;
    int K = 8;
    int max_iters = 60;
    std::uint64_t seed = 1;
    int threads = -1;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("malformed JSON in " + path + ": " + e.what());
    }
}

RadialKernel load_kernel(const RunConfig& c) {
    if (!c.kernel_path.empty()) return kernel_from_json(read_json_file(c.kernel_path));
    return build_kernel(family_from_name(c.family), {}, 2);
}

StarShape2D load_shape(const std::string& path) {
    if (path.empty()) return unit_disk();
    return shape_from_json(read_json_file(path));
}

double checked_eps(double eps) {
    if (std::isnan(eps)) throw UsageError("--eps is required");
    if (!(eps > 0.0)) throw ValidationError("epsilon must be positive");
    return eps;
}

double checked_gamma(double gamma) {
    if (std::isnan(gamma)) throw UsageError("--gamma is required");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ValidationError("gamma must lie in (0, 1)");
    return gamma;
}

// Writes the artifact to --out when given, otherwise to the standard stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : path_(path), fallback_(fallback) {}
    std::ostream& stream() { return path_.empty() ? fallback_ : buf_; }
    void commit() {
        if (path_.empty()) return;
        std::ofstream f(path_, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + path_);
        f << buf_.str();
    }

private:
    std::string path_;
    std::ostream& fallback_;
    std::ostringstream buf_;
};

void write_json(const RunConfig& c, const json& j, std::ostream& out) {
    Sink s(c.out_path, out);
    s.stream() << j.dump(2) << "\n";
    s.commit();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

json optimizer_report_to_json(const OptimizerReport& r) {
    return {{"final_shape", shape_to_json(r.final_shape)},
            {"trace", r.trace},
            {"f_final", r.f_final},
            {"u_h1", r.u_h1},
            {"delta_hat", r.delta_hat},
            {"grad_norm", r.grad_norm},
            {"iterations", r.iterations},
            {"converged", r.converged}};
}

json constraint_report_to_json(const ConstraintReport& r) {
    return {{"volume_residual", r.volume_residual}, {"volume_scale", r.volume_scale}, {"c_hat", r.c_hat},
            {"gap", r.gap}, {"a0_sq", r.a0_sq}, {"a1_sq", r.a1_sq}, {"applicable", r.applicable},
            {"gap_nonnegative", r.gap_nonnegative}};
}

json deficit_report_to_json(const DeficitReport& r) {
    return {{"t", r.t},
            {"u_l2_sq", r.u_l2_sq},
            {"grad_sq", r.grad_sq},
            {"perimeter_deficit", r.perimeter_deficit},
            {"bracket_lower", r.bracket_lower},
            {"bracket_upper", r.bracket_upper},
            {"bracket_holds", r.bracket_holds},
            {"per_nonlocal", r.per_nonlocal},
            {"cross_term", r.cross_term},
            {"psi", r.psi},
            {"decomposition_residual", r.decomposition_residual},
            {"energy_deficit", r.energy_deficit},
            {"energy_bound", r.energy_bound},
            {"energy_bound_holds", r.energy_bound_holds}};
}

json quadratic_form_to_json(const QuadraticFormReport& r) {
    return {{"q_value", r.q_value}, {"h1_seminorm", r.h1_seminorm}, {"ratio", r.ratio},
            {"q_eta_hat", r.q_eta_hat}, {"lipschitz_warning", r.lipschitz_warning}};
}

std::string cmd_kernel_info(const RunConfig& c, std::ostream& out) {
    const RadialKernel k = load_kernel(c);
    const MomentResult I1 = moment(k, 1);
    const MomentResult I2 = moment(k, 2);
    json j = {{"kernel", kernel_to_json(k)},
              {"I1", I1.value},
              {"I1_target", 1.0 / k1n_constant(k.dimension())},
              {"I2", I2.finite ? json(I2.value) : json(nullptr)},
              {"I2_finite", I2.finite},
              {"hypotheses", hypothesis_report_to_json(check_hypotheses(k))}};
    if (!std::isnan(c.eps)) {
        const KernelFamily fam{k, checked_eps(c.eps)};
        j["epsilon"] = c.eps;
        j["rho_first_moment"] = rho_first_moment(fam);
        j["eta_mass"] = eta_mass(fam);
    }
    write_json(c, j, out);
    return "kernel " + family_name(k.family()) + ": I1 = " + fmt(I1.value);
}

std::string cmd_perim(const RunConfig& c, std::ostream& out, bool with_gamma) {
    if (!c.batch_path.empty()) {
        const std::string base = std::filesystem::path(c.batch_path).parent_path().string();
        const json res = evaluate_batch(read_json_file(c.batch_path), base);
        write_json(c, res, out);
        return "evaluated " + std::to_string(res.size()) + " batch entries";
    }
    const double eps = checked_eps(c.eps);
    const double gamma = with_gamma ? checked_gamma(c.gamma) : 0.0;
    const PerMethod m = method_from_name(c.method);
    const KernelFamily fam{load_kernel(c), eps};
    const StarShape2D E = load_shape(c.shape_path);
    QuadratureOptions opt;
    std::ofstream dump;
    if (!c.dump_path.empty()) {
        if (m != PerMethod::slicing) throw ValidationError("--dump-slices needs the slicing method");
        dump.open(c.dump_path, std::ios::binary);
        if (!dump) throw ValidationError("cannot write " + c.dump_path);
        opt.slicing.dump = &dump;
    }
    const EnergyReport r = with_gamma ? energy(E, fam, gamma, m, opt) : per_nonlocal(E, fam, m, opt);
    write_json(c, energy_report_to_json(r), out);
    if (with_gamma) return "F = " + fmt(r.f_gamma) + " (" + method_name(m) + ")";
    return "Per = " + fmt(r.per_nonlocal) + " (" + method_name(m) + ")";
}

std::string cmd_slice_check(const RunConfig& c, std::ostream& out) {
    const KernelFamily fam{load_kernel(c), checked_eps(c.eps)};
    const StarShape2D E = load_shape(c.shape_path);
    const PerValue s = per_slicing(E, fam);
    const PerValue a = per_area(E, fam);
    json j = {{"epsilon", fam.eps},
              {"per_local", local_perimeter(E)},
              {"slicing", {{"value", s.value}, {"error_estimate", s.error_estimate}}},
              {"area", {{"value", a.value}, {"error_estimate", a.error_estimate}}}};
    double spread = std::abs(a.value - s.value);
    try {
        const PerValue p = per_polar(E, fam);
        j["polar"] = {{"value", p.value}, {"error_estimate", p.error_estimate}};
        spread = std::max(spread, std::abs(p.value - s.value));
    } catch (const ValidationError& e) {
        j["polar"] = nullptr;
        j["polar_note"] = e.what();
    }
    const double rel = s.value != 0.0 ? spread / std::abs(s.value) : spread;
    j["max_relative_difference"] = rel;
    write_json(c, j, out);
    return "methods agree to " + fmt(rel) + " relative";
}

std::string cmd_fuglede(const RunConfig& c, std::ostream& out) {
    const KernelFamily fam{load_kernel(c), checked_eps(c.eps)};
    const double gamma = checked_gamma(c.gamma);
    if (!c.field_path.empty()) {
        if (std::isnan(c.t)) throw UsageError("--t is required with --field");
        const SphericalField u = field_from_json(read_json_file(c.field_path));
        json j = {{"constraints", constraint_report_to_json(constraint_checks(u, c.t))}};
        if (u.dimension() == 2) {
            j["deficit"] = deficit_report_to_json(deficit_checks(c.t, u, fam, gamma));
            j["quadratic_form"] = quadratic_form_to_json(nonlocal_form_Q(u, fam));
        }
        write_json(c, j, out);
        return "checked field of degree " + std::to_string(u.degree());
    }
    if (c.cases < 1) throw ValidationError("--cases must be positive");
    std::mt19937_64 rng(c.seed);
    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    write_csv_row(os, {"case", "t", "gamma", "u_l2_sq", "grad_sq", "perimeter_deficit", "bracket_lower",
                       "bracket_upper", "bracket_holds", "energy_deficit", "energy_bound", "energy_bound_holds",
                       "decomposition_residual"});
    int held = 0;
    for (int i = 0; i < c.cases; ++i) {
        const CenteredField cf = random_centered_field(c.K, c.amplitude, rng);
        const DeficitReport r = deficit_checks(cf.t, cf.u, fam, gamma);
        if (r.bracket_holds && r.energy_bound_holds) ++held;
        write_csv_row(os, {std::to_string(i), format_number(r.t), format_number(gamma), format_number(r.u_l2_sq),
                           format_number(r.grad_sq), format_number(r.perimeter_deficit),
                           format_number(r.bracket_lower), format_number(r.bracket_upper),
                           r.bracket_holds ? "true" : "false", format_number(r.energy_deficit),
                           format_number(r.energy_bound), r.energy_bound_holds ? "true" : "false",
                           format_number(r.decomposition_residual)});
    }
    sink.commit();
    return std::to_string(held) + "/" + std::to_string(c.cases) + " cases satisfy both bounds";
}

OptimizerConfig optimizer_config(const RunConfig& c) {
    OptimizerConfig cfg;
    cfg.K = c.K;
    cfg.max_iters = c.max_iters;
    cfg.seed = c.seed;
    return cfg;
}

std::string cmd_optimize(const RunConfig& c, std::ostream& out) {
    const KernelFamily fam{load_kernel(c), checked_eps(c.eps)};
    const double gamma = checked_gamma(c.gamma);
    const OptimizerConfig cfg = optimizer_config(c);
    StarShape2D init;
    if (c.shape_path.empty()) {
        std::mt19937_64 rng(c.seed);
        init = random_inits(1, c.K, c.amplitude, rng).front();
    } else {
        init = load_shape(c.shape_path);
    }
    const OptimizerReport r = minimize(init, fam, gamma, cfg);
    json j = optimizer_report_to_json(r);
    j["initial_shape"] = shape_to_json(init);
    j["epsilon"] = fam.eps;
    j["gamma"] = gamma;
    write_json(c, j, out);
    return "F = " + fmt(r.f_final) + " after " + std::to_string(r.iterations) + " iterations, ||u||_H1 = " +
           fmt(r.u_h1);
}

std::string cmd_sweep(const RunConfig& c, std::ostream& out) {
    if (c.eps_list.empty()) throw UsageError("--eps is required");
    for (double e : c.eps_list) checked_eps(e);
    const double gamma = checked_gamma(c.gamma);
    if (c.inits < 1) throw ValidationError("--inits must be positive");
    std::mt19937_64 rng(c.seed);
    const auto inits = random_inits(c.inits, c.K, c.amplitude, rng);
    const auto rows = sweep(load_kernel(c), gamma, c.eps_list, inits, optimizer_config(c));
    Sink sink(c.out_path, out);
    write_sweep_csv(sink.stream(), rows);
    sink.commit();
    int conv = 0;
    for (const SweepRow& r : rows) conv += r.converged ? 1 : 0;
    return std::to_string(rows.size()) + " runs, " + std::to_string(conv) + " converged";
}

std::string cmd_convexify(const RunConfig& c, std::ostream& out) {
    const double eps = checked_eps(c.eps);
    const double gamma = checked_gamma(c.gamma);
    std::vector<StarShape2D> shapes;
    for (const std::string& p : c.shape_paths) shapes.push_back(load_shape(p));
    if (shapes.empty()) {
        if (c.cases < 1) throw ValidationError("--cases must be positive");
        std::mt19937_64 rng(c.seed);
        shapes = random_nonconvex_shapes(c.cases, rng);
    }
    const auto rows = convexification_experiment(shapes, load_kernel(c), gamma, eps);
    Sink sink(c.out_path, out);
    std::ostream& os = sink.stream();
    write_csv_row(os, {"shape_id", "convex_input", "critical_shape", "critical_hull", "critical_margin", "f_shape",
                       "f_scaled_hull", "f_margin", "critical_ok", "f_ok"});
    int ok = 0;
    for (const ConvexificationRow& r : rows) {
        ok += (r.critical_ok && r.f_ok) ? 1 : 0;
        write_csv_row(os, {std::to_string(r.shape_id), r.convex_input ? "true" : "false",
                           format_number(r.critical_shape), format_number(r.critical_hull),
                           format_number(r.critical_margin), format_number(r.f_shape),
                           format_number(r.f_scaled_hull), format_number(r.f_margin),
                           r.critical_ok ? "true" : "false", r.f_ok ? "true" : "false"});
    }
    sink.commit();
    return std::to_string(ok) + "/" + std::to_string(rows.size()) + " shapes improved by convexification";
}

// Random bounded unions of up to four intervals inside [-3, 3].
IntervalUnion random_union(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> U(-3.0, 3.0);
    const int m = count(rng);
    std::vector<double> ends(2 * m);
    for (double& e : ends) e = U(rng);
    std::sort(ends.begin(), ends.end());
    std::vector<std::pair<double, double>> pieces;
    for (int i = 0; i < m; ++i) pieces.emplace_back(ends[2 * i], ends[2 * i + 1]);
    return IntervalUnion(pieces);
}

std::string cmd_oned_check(const RunConfig& c, std::ostream& out) {
    const RadialKernel k = load_kernel(c);
    const KernelFamily fam{k, std::isnan(c.eps) ? 1.0 : checked_eps(c.eps)};
    if (c.cases < 1) throw ValidationError("--cases must be positive");
    std::mt19937_64 rng(c.seed);
    double max_err = 0.0;
    json rows = json::array();
    for (int i = 0; i < c.cases; ++i) {
        const IntervalUnion J = random_union(rng);
        const double closed = crit1_closed_form(J, fam);
        const double brute = J.boundary_points() - per1_bruteforce(J, fam);
        max_err = std::max(max_err, std::abs(closed - brute));
        rows.push_back({{"pieces", J.size()}, {"closed_form", closed}, {"bruteforce", brute}});
    }
    json j = {{"epsilon", fam.eps},
              {"kernel", kernel_to_json(k)},
              {"cases", rows},
              {"max_error", max_err},
              {"J0", tail_integral_J(fam, 0.0)},
              {"four_J1", 4.0 * tail_integral_J(fam, 1.0)}};
    write_json(c, j, out);
    return "closed form vs quadrature on " + std::to_string(c.cases) + " unions: max error " + fmt(max_err);
}

void add_kernel_options(CLI::App* s, RunConfig& c) {
    s->add_option("--kernel", c.kernel_path, "kernel spec JSON");
    s->add_option("--family", c.family, "built-in family when no --kernel file is given");
}

void add_out(CLI::App* s, RunConfig& c) { s->add_option("--out", c.out_path, "output path (default stdout)"); }
}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Nonlocal perimeter and liquid drop experiments", "dropshape"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--threads", c.threads, "worker thread cap (default DROPSHAPE_THREADS or hardware)");
    app.add_option("--seed", c.seed, "seed for every random draw");

    auto* ki = app.add_subcommand("kernel-info", "moments and hypotheses of a kernel");
    add_kernel_options(ki, c);
    ki->add_option("--eps", c.eps, "also report rescaled moments at this eps");
    add_out(ki, c);

    auto* pe = app.add_subcommand("perim", "nonlocal perimeter of a shape");
    auto* en = app.add_subcommand("energy", "liquid drop energy of a shape");
    for (auto* s : {pe, en}) {
        add_kernel_options(s, c);
        s->add_option("--shape", c.shape_path, "shape JSON (default unit disk)");
        s->add_option("--eps", c.eps, "kernel scale");
        s->add_option("--method", c.method, "slicing, area or polar");
        s->add_option("--batch", c.batch_path, "JSON list of evaluations");
        s->add_option("--dump-slices", c.dump_path, "CSV of the slices used by the slicing method");
        add_out(s, c);
    }
    en->add_option("--gamma", c.gamma, "nonlocal weight in (0, 1)");

    auto* sc = app.add_subcommand("slice-check", "compare the perimeter methods on one shape");
    add_kernel_options(sc, c);
    sc->add_option("--shape", c.shape_path, "shape JSON (default unit disk)");
    sc->add_option("--eps", c.eps, "kernel scale");
    add_out(sc, c);

    auto* fu = app.add_subcommand("fuglede-check", "deficit bounds for nearly spherical sets");
    add_kernel_options(fu, c);
    fu->add_option("--field", c.field_path, "spherical field JSON");
    fu->add_option("--t", c.t, "deformation size for --field");
    fu->add_option("--eps", c.eps, "kernel scale");
    fu->add_option("--gamma", c.gamma, "nonlocal weight in (0, 1)");
    fu->add_option("--cases", c.cases, "number of random centered fields");
    fu->add_option("--K", c.K, "highest Fourier mode of the random fields");
    fu->add_option("--amplitude", c.amplitude, "size of the random perturbations");
    add_out(fu, c);

    auto* op = app.add_subcommand("optimize", "minimize the energy at fixed area");
    auto* sw = app.add_subcommand("sweep", "optimize from random inits over an eps grid");
    for (auto* s : {op, sw}) {
        add_kernel_options(s, c);
        s->add_option("--gamma", c.gamma, "nonlocal weight in (0, 1)");
        s->add_option("--K", c.K, "highest Fourier mode");
        s->add_option("--max-iters", c.max_iters, "iteration cap");
        s->add_option("--amplitude", c.amplitude, "size of the random inits");
        add_out(s, c);
    }
    op->add_option("--shape", c.shape_path, "initial shape JSON (default random)");
    op->add_option("--eps", c.eps, "kernel scale");
    sw->add_option("--eps", c.eps_list, "comma separated eps grid")->delimiter(',');
    sw->add_option("--inits", c.inits, "number of random inits");

    auto* cv = app.add_subcommand("convexify", "energy of shapes against their rescaled hulls");
    add_kernel_options(cv, c);
    cv->add_option("--shapes", c.shape_paths, "shape JSON files (default random nonconvex shapes)");
    cv->add_option("--cases", c.cases, "number of random shapes");
    cv->add_option("--eps", c.eps, "kernel scale");
    cv->add_option("--gamma", c.gamma, "nonlocal weight in (0, 1)");
    add_out(cv, c);

    auto* od = app.add_subcommand("oned-check", "1D closed forms against direct quadrature");
    add_kernel_options(od, c);
    od->add_option("--eps", c.eps, "kernel scale (default 1)");
    od->add_option("--cases", c.cases, "number of random interval unions");
    add_out(od, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << app.help();
        return 1;
    }

    if (c.threads < 0) {
        if (const char* env = std::getenv("DROPSHAPE_THREADS")) c.threads = std::atoi(env);
    }
    set_thread_count(std::max(c.threads, 0));

    try {
        std::string summary;
        CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "kernel-info") summary = cmd_kernel_info(c, out);
        else if (name == "perim") summary = cmd_perim(c, out, false);
        else if (name == "energy") summary = cmd_perim(c, out, true);
        else if (name == "slice-check") summary = cmd_slice_check(c, out);
        else if (name == "fuglede-check") summary = cmd_fuglede(c, out);
        else if (name == "optimize") summary = cmd_optimize(c, out);
        else if (name == "sweep") summary = cmd_sweep(c, out);
        else if (name == "convexify") summary = cmd_convexify(c, out);
        else summary = cmd_oned_check(c, out);
        (c.out_path.empty() ? err : out) << name << ": " << summary << "\n";
        return 0;
    } catch (const UsageError& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << e.what() << "\n";
        return 3;
    }
}

}  // namespace dropshape
