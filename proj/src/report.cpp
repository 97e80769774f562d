#include "mixsdde/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixsdde/errors.hpp"

namespace mixsdde::report {

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json summary_json(const stats::Summary& s) {
    return Json{{"count", s.count}, {"mean", s.mean},     {"stddev", s.stddev}, {"standard_error", s.standard_error},
                {"median", s.median}, {"min", s.min}, {"max", s.max}};
}

Json proportion_json(const stats::Proportion& p) {
    return Json{{"successes", p.successes},
                {"trials", p.trials},
                {"estimate", p.estimate},
                {"ci95", Json::array({p.lower, p.upper})}};
}

Json criteria_json(const std::vector<exp::CriterionResult>& cs) {
    Json a = Json::array();
    for (const auto& c : cs) a.push_back(Json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return a;
}

Json doubles(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

std::string version() {
#ifdef MIXSDDE_VERSION
    return MIXSDDE_VERSION;
#else
    return "unknown";
#endif
}

Json to_json(const AssumptionReport& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json j{{"name", c.name},     {"applicable", c.applicable},   {"passed", c.passed},
               {"bound", c.bound},   {"worst_ratio", c.worst_ratio}, {"samples", c.samples}};
        if (!c.witness.empty()) j["witness"] = c.witness;
        checks.push_back(std::move(j));
    }
    return Json{{"all_passed", r.all_passed()},
                {"implied",
                 {{"growth", r.implied.growth},
                  {"derivative_bound", r.implied.derivative_bound},
                  {"lipschitz", r.implied.lipschitz},
                  {"time_holder", r.implied.time_holder},
                  {"K", r.implied.constant_k}}},
                {"used",
                 {{"K", r.growth_used}, {"K_R", r.lipschitz_used}, {"beta", r.beta_used}, {"theta", r.theta_used}}},
                {"checks", std::move(checks)}};
}

Json to_json(const exp::ConvergenceReport& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"level", l.level},
                              {"exceedance", proportion_json(l.exceedance)},
                              {"distance", summary_json(l.distance)},
                              {"distances", doubles(l.distances)}});
    return Json{{"type", "ConvergenceReport"},
                {"kind", std::string(exp::to_string(r.kind))},
                {"seed", r.seed},
                {"replicas", r.replicas},
                {"epsilon", r.epsilon},
                {"driver_steps", r.finest_steps},
                {"reference", r.reference},
                {"levels", std::move(levels)},
                {"slope", opt(r.slope)},
                {"criteria", criteria_json(r.criteria)},
                {"assumptions", to_json(r.assumptions)},
                {"passed", r.passed()}};
}

Json to_json(const exp::MomentReport& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"p", l.p},
                              {"sup_power", summary_json(l.sup_power)},
                              {"truncated_power", summary_json(l.truncated_power)},
                              {"terminal_power", summary_json(l.terminal_power)},
                              {"sup_lp_norm", l.sup_lp_norm},
                              {"half_sample_mean", l.half_sample_mean},
                              {"relative_change", l.relative_change},
                              {"top_share", l.top_share},
                              {"heavy_tail", l.heavy_tail},
                              {"oracle", opt(l.oracle)}});
    return Json{{"type", "MomentReport"},
                {"seed", r.seed},
                {"replicas", r.replicas},
                {"steps", r.steps},
                {"indicator_rate", r.indicator_rate},
                {"levels", std::move(levels)},
                {"survival", {{"x", doubles(r.survival_x)}, {"p", doubles(r.survival_p)}}},
                {"criteria", criteria_json(r.criteria)},
                {"assumptions", to_json(r.assumptions)},
                {"passed", r.passed()}};
}

Json to_json(const exp::QuasiReport& r) {
    Json levels = Json::array();
    for (const auto& l : r.levels)
        levels.push_back(Json{{"perturbation", l.perturbation},
                              {"numerator", l.numerator},
                              {"denominator", l.denominator},
                              {"ratio", opt(l.ratio)},
                              {"in_event", l.in_event}});
    return Json{{"type", "QuasiContractReport"},
                {"seed", r.seed},
                {"replicas", r.replicas},
                {"p", r.power},
                {"levels", std::move(levels)},
                {"spread", opt(r.spread)},
                {"inconclusive", r.inconclusive},
                {"unbounded_growth", r.unbounded_growth},
                {"criteria", criteria_json(r.criteria)},
                {"assumptions", to_json(r.assumptions)},
                {"passed", r.passed()}};
}

Json envelope(exp::Kind kind, const config::LoadedConfig& cfg, Json body, bool passed) {
    return Json{{"version", version()},
                {"experiment", std::string(exp::report_name(kind))},
                {"config", config::to_json(cfg)},
                {"report", std::move(body)},
                {"passed", passed}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string path_csv(const GridPath& path, const std::vector<std::string>& columns) {
    if (!columns.empty() && columns.size() != path.dim())
        throw ConstraintError("csv needs one column name per component");
    std::string s = "time";
    for (std::size_t j = 0; j < path.dim(); ++j) s += "," + (columns.empty() ? "v" + std::to_string(j + 1) : columns[j]);
    s += "\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        s += number(path.time(k));
        for (std::size_t j = 0; j < path.dim(); ++j) s += "," + number(path(k, j));
        s += "\n";
    }
    return s;
}

void write_path_csv(const std::filesystem::path& file, const GridPath& path, const std::vector<std::string>& columns) {
    write_text(file, path_csv(path, columns));
}

GridPath parse_path_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv is empty");
    std::size_t cols = 1;
    for (char c : line) cols += c == ',';
    if (cols < 2) throw ParseError("csv header needs a time column and at least one value column");
    std::vector<double> times, values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            double v = 0.0;
            try {
                std::size_t used = 0;
                v = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw ParseError("csv row " + std::to_string(row) + ": '" + cell + "' is not a number");
            }
            if (c == 0) times.push_back(v);
            else values.push_back(v);
            ++c;
        }
        if (c != cols) throw ParseError("csv row " + std::to_string(row) + " has " + std::to_string(c) + " fields, expected " + std::to_string(cols));
    }
    if (times.size() < 2) throw ParseError("csv needs at least two rows");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw ParseError("csv time column must be increasing");
    for (std::size_t k = 0; k < times.size(); ++k)
        if (std::abs(times[k] - (times.front() + static_cast<double>(k) * dt)) > 1e-9 * std::max(1.0, std::abs(times[k])))
            throw ParseError("csv time column is not a uniform grid (row " + std::to_string(k + 2) + ")");
    return GridPath(times.front(), dt, cols - 1, std::move(values));
}

GridPath read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_path_csv(ss.str());
}

std::string distances_csv(const exp::ConvergenceReport& r) {
    std::string s = "replica";
    for (const auto& l : r.levels) s += "," + number(l.level);
    s += "\n";
    for (std::size_t i = 0; i < r.replicas; ++i) {
        s += std::to_string(i);
        for (const auto& l : r.levels) s += "," + number(l.distances[i]);
        s += "\n";
    }
    return s;
}

}  // namespace mixsdde::report
