#include "mixsdde/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "mixsdde/config.hpp"
#include "mixsdde/errors.hpp"
#include "mixsdde/experiments.hpp"
#include "mixsdde/fbm.hpp"
#include "mixsdde/fraccalc.hpp"
#include "mixsdde/report.hpp"

namespace mixsdde::cli {

namespace fs = std::filesystem;
using config::Json;

namespace {

struct Common {
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::size_t workers = 0;
    int verbosity = 0;
};

fs::path output_dir(const Common& c) {
    if (!c.out_dir.empty()) return c.out_dir;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return ".";
}

std::size_t worker_count(const Common& c) {
    if (c.workers > 0) return c.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct FbmArgs {
    double hurst = 0.75;
    std::size_t steps = 512;
    double horizon = 1.0;
    std::string method = "auto";
    std::uint64_t stream = 0;
    std::string name = "fbm";
};

int run_fbm(const FbmArgs& a, const Common& c, std::ostream& out) {
    fbm::FbmParams p;
    p.hurst = a.hurst;
    p.n_steps = a.steps;
    p.horizon = a.horizon;
    p.method = exp::resolve_method(exp::driver_method_from_string(a.method), a.steps);
    p.validate();
    const SeedSpec seed{c.seed.value_or(0), a.stream};
    const GridPath path = fbm::sample_fbm(p, seed);

    const fs::path dir = output_dir(c);
    report::write_path_csv(dir / (a.name + ".csv"), path, {"value"});
    const Json meta{{"version", report::version()},
                    {"hurst", p.hurst},
                    {"steps", p.n_steps},
                    {"horizon", p.horizon},
                    {"method", std::string(fbm::to_string(p.method))},
                    {"seed", seed.master_seed},
                    {"stream", seed.stream_index}};
    report::write_text(dir / (a.name + ".json"), report::dump(meta));
    out << "wrote " << (dir / (a.name + ".csv")).string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct FracArgs {
    std::string input;
    std::string integrator;
    double alpha = 0.0;
    std::optional<double> lambda;
    std::optional<double> mu;
    std::optional<double> a;
    std::optional<double> b;
};

GridPath scalar_path(const std::string& file) {
    GridPath p = report::read_path_csv(file);
    if (p.dim() != 1) throw ParseError(file + ": frac expects exactly one value column");
    return p;
}

int run_frac(const FracArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
    const GridPath f = scalar_path(a.input);
    std::optional<frac::Interval> iv;
    if (a.a || a.b) iv = frac::Interval{a.a.value_or(f.t0()), a.b.value_or(f.end_time())};
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw ConstraintError("alpha must lie in (0, 1)");

    Json j{{"version", report::version()}, {"input", a.input}, {"alpha", a.alpha}};
    if (iv) j["interval"] = Json::array({iv->a, iv->b});
    if (!a.integrator.empty()) {
        const GridPath g = scalar_path(a.integrator);
        j["integrator"] = a.integrator;
        const frac::GlsDiagnostics d = frac::gls_integral_checked(f, g, a.alpha, iv);
        j["integral"] = d.integral;
        j["diagnostics"] = Json{{"norm_1_alpha_f", d.norm_f},
                                {"seminorm_0_alpha_g", d.seminorm_g},
                                {"growth_f", d.growth_f},
                                {"growth_g", d.growth_g},
                                {"norms_unbounded", d.norms_unbounded}};
        if (d.norms_unbounded)
            err << "warning: fractional norms do not settle under refinement; the integral is unreliable\n";
        j["riemann_stieltjes"] = frac::riemann_stieltjes_integral(f, g, frac::RsRule::kMidpoint, iv);
        if (a.lambda && a.mu) {
            j["lambda"] = *a.lambda;
            j["mu"] = *a.mu;
            j["young_love_bound"] = frac::young_love_bound(f, g, *a.lambda, *a.mu, iv);
        }
    } else {
        if (!a.lambda) throw ParseError("frac without --integrator needs --lambda for the norm bundle");
        const frac::NormBundle n = frac::fractional_norms(f, a.alpha, *a.lambda, iv);
        j["lambda"] = *a.lambda;
        j["norms"] = Json{{"norm_1_alpha", n.norm_1_alpha},
                          {"seminorm_0_alpha", n.seminorm_0_alpha},
                          {"sup_norm", n.sup_norm},
                          {"holder", n.holder}};
    }
    const std::string text = report::dump(j);
    report::write_text(output_dir(c) / "frac.json", text);
    out << text;
    return 0;
}

// ---------------------------------------------------------------------------

config::LoadedConfig load(const std::string& file, const Common& c) {
    config::LoadedConfig cfg = config::load_config(file);
    if (c.seed) {
        cfg.seed = *c.seed;
        if (cfg.experiment) cfg.experiment->seed = *c.seed;
    }
    return cfg;
}

int run_solve(const std::string& file, const Common& c, std::ostream& out) {
    const config::LoadedConfig cfg = load(file, c);
    const auto t0 = std::chrono::steady_clock::now();
    const GridPath x = exp::solve_model(cfg.model, cfg.seed);
    const double runtime = seconds_since(t0);

    const fs::path dir = output_dir(c);
    report::write_path_csv(dir / "solution.csv", x);
    const auto& s = cfg.model.coefficients;
    const Json meta{{"version", report::version()},
                    {"seed", cfg.seed},
                    {"dims", {{"state", s.state_dim}, {"wiener", s.wiener_dim}, {"driver", s.driver_dim}}},
                    {"scheme", std::string(solver::to_string(cfg.model.scheme))},
                    {"steps", cfg.model.steps},
                    {"runtime_seconds", runtime},
                    {"config", config::to_json(cfg)}};
    report::write_text(dir / "solution.json", report::dump(meta));
    out << "wrote " << (dir / "solution.csv").string() << " (" << x.size() << " nodes)\n";
    return 0;
}

// ---------------------------------------------------------------------------

int run_experiment(const std::string& kind_text, const std::string& file, bool paths, const Common& c,
                   std::ostream& out, std::ostream& err) {
    exp::Kind kind;
    try {
        kind = exp::kind_from_string(kind_text);
    } catch (const ConstraintError& e) {
        throw ParseError(e.what());
    }
    const config::LoadedConfig cfg = load(file, c);
    if (!cfg.experiment) throw ParseError(file + " has no experiment section");
    if (cfg.experiment->kind != kind)
        throw ParseError("config describes a '" + std::string(exp::to_string(cfg.experiment->kind)) +
                         "' experiment, not '" + std::string(exp::to_string(kind)) + "'");
    const exp::ExperimentConfig& x = *cfg.experiment;
    const std::size_t workers = worker_count(c);
    if (c.verbosity > 0)
        err << "running " << exp::report_name(kind) << ": " << x.replicas << " replicas on " << workers
            << " workers\n";

    const auto t0 = std::chrono::steady_clock::now();
    Json body;
    bool passed = false;
    std::optional<std::string> extra_csv;
    std::string extra_suffix;
    switch (kind) {
        case exp::Kind::kCoeffConvergence:
        case exp::Kind::kVanishingDelay:
        case exp::Kind::kEulerRefinement:
        case exp::Kind::kItoLimit: {
            exp::ConvergenceReport r;
            if (kind == exp::Kind::kCoeffConvergence) r = exp::run_coefficient_convergence(x, workers);
            else if (kind == exp::Kind::kVanishingDelay) r = exp::run_vanishing_delay(x, workers);
            else if (kind == exp::Kind::kEulerRefinement) r = exp::run_euler_refinement(x, workers);
            else r = exp::run_ito_limit(x, workers);
            body = report::to_json(r);
            passed = r.passed();
            extra_csv = report::distances_csv(r);
            extra_suffix = "_distances.csv";
            for (const auto& l : r.levels)
                out << "level " << l.level << ": exceedance " << l.exceedance.estimate << " [" << l.exceedance.lower
                    << ", " << l.exceedance.upper << "], mean distance " << l.distance.mean << "\n";
            break;
        }
        case exp::Kind::kMoments: {
            const exp::MomentReport r = exp::estimate_moments(x, workers);
            body = report::to_json(r);
            passed = r.passed();
            std::string s = "x,survival\n";
            for (std::size_t i = 0; i < r.survival_x.size(); ++i) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r.survival_x[i], r.survival_p[i]);
                s += buf;
            }
            extra_csv = s;
            extra_suffix = "_survival.csv";
            for (const auto& l : r.levels)
                out << "p = " << l.p << ": sup moment " << l.sup_power.mean << " (se " << l.sup_power.standard_error
                    << "), terminal " << l.terminal_power.mean << "\n";
            break;
        }
        case exp::Kind::kQuasiContract: {
            const exp::QuasiReport r = exp::estimate_quasi_contractivity(x, workers);
            body = report::to_json(r);
            passed = r.passed();
            for (const auto& l : r.levels)
            {
                out << "perturbation " << l.perturbation << ": ratio ";
                if (l.ratio) out << *l.ratio;
                else out << "n/a";
                out << " (" << l.in_event << " replicas in event)\n";
            }
            break;
        }
    }
    const double runtime = seconds_since(t0);

    const fs::path dir = output_dir(c);
    const std::string name(exp::report_name(kind));
    for (const auto& cr : body["criteria"]) {
        out << (cr["passed"].get<bool>() ? "PASS " : "FAIL ") << cr["name"].get<std::string>() << ": "
            << cr["detail"].get<std::string>() << "\n";
    }
    report::write_text(dir / (name + ".json"), report::dump(report::envelope(kind, cfg, std::move(body), passed)));
    report::write_text(dir / (name + ".timing.json"),
                       report::dump(Json{{"runtime_seconds", runtime}, {"workers", workers}}));
    if (paths && extra_csv) report::write_text(dir / (name + extra_suffix), *extra_csv);
    out << name << ": " << (passed ? "passed" : "FAILED") << "\n";
    return passed ? 0 : static_cast<int>(ExitCode::kCriteriaFailed);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mixed stochastic delay differential equations: simulation and convergence experiments", "mixsdde"};
    app.require_subcommand(1);
    app.set_version_flag("--version", report::version());

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", common.out_dir, std::string("output directory (default: $") + kOutputDirEnv + " or .)");
        sub->add_option("--seed", common.seed, "master seed override");
        sub->add_option("--workers", common.workers, "worker threads (default: hardware concurrency)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("-v,--verbose", common.verbosity, "more diagnostics on stderr");
    };

    FbmArgs fa;
    auto* fbm_cmd = app.add_subcommand("fbm", "sample one fractional Brownian motion path");
    fbm_cmd->add_option("--hurst", fa.hurst, "Hurst index in (1/2, 1)")->required();
    fbm_cmd->add_option("--steps", fa.steps, "grid steps")->capture_default_str();
    fbm_cmd->add_option("--horizon", fa.horizon, "time horizon T")->capture_default_str();
    fbm_cmd->add_option("--method", fa.method, "auto, cholesky or davies_harte")->capture_default_str();
    fbm_cmd->add_option("--stream", fa.stream, "stream index")->capture_default_str();
    fbm_cmd->add_option("--name", fa.name, "base name of the output files")->capture_default_str();
    add_common(fbm_cmd);

    FracArgs ra;
    auto* frac_cmd = app.add_subcommand("frac", "fractional norms of a path, or its integral against another");
    frac_cmd->add_option("--input", ra.input, "CSV path f")->required();
    frac_cmd->add_option("--integrator", ra.integrator, "CSV path g; computes the integral of f dg");
    frac_cmd->add_option("--alpha", ra.alpha, "fractional order alpha in (0, 1)")->required();
    frac_cmd->add_option("--lambda", ra.lambda, "Hoelder exponent of f");
    frac_cmd->add_option("--mu", ra.mu, "Hoelder exponent of g (Young-Love bound)");
    frac_cmd->add_option("--a", ra.a, "left end of the interval");
    frac_cmd->add_option("--b", ra.b, "right end of the interval");
    add_common(frac_cmd);

    std::string solve_config;
    auto* solve_cmd = app.add_subcommand("solve", "solve one configured equation");
    solve_cmd->add_option("--config", solve_config, "JSON config")->required();
    add_common(solve_cmd);

    std::string exp_kind, exp_config;
    bool exp_paths = false;
    auto* exp_cmd = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    exp_cmd->add_option("kind", exp_kind, "coeff, delay, euler, ito, moments or quasi")
        ->required()
        ->check(CLI::IsMember({"coeff", "delay", "euler", "ito", "moments", "quasi"}));
    exp_cmd->add_option("--config", exp_config, "JSON config")->required();
    exp_cmd->add_flag("--paths", exp_paths, "also write per-replica CSV");
    add_common(exp_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << report::version() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kParseError);
    }

    try {
        if (fbm_cmd->parsed()) return run_fbm(fa, common, out);
        if (frac_cmd->parsed()) return run_frac(ra, common, out, err);
        if (solve_cmd->parsed()) return run_solve(solve_config, common, out);
        return run_experiment(exp_kind, exp_config, exp_paths, common, out, err);
    } catch (const ExplosionError& e) {
        err << "error: solver explosion at step " << e.step() << " (t = " << e.time() << "): " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(e.exit_code());
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kIoError);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::kConstraintViolation);
    }
}

}  // namespace mixsdde::cli
