#include "mixsdde/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "mixsdde/errors.hpp"

namespace mixsdde::config {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Enum spellings are part of the schema, so an unknown one is a parse error.
template <class Fn>
auto enum_value(Fn&& convert, const std::string& text, const std::string& where) {
    try {
        return convert(text);
    } catch (const ConstraintError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

// Strict view of a JSON object: every key must be consumed before finish().
class Reader {
public:
    Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ParseError((path_.empty() ? std::string("config") : path_) + " must be an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const Json& raw(const std::string& key) {
        if (!j_.contains(key)) throw ParseError("missing required key '" + join(path_, key) + "'");
        seen_.insert(key);
        return j_.at(key);
    }

    std::string where(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key) { return as_number(raw(key), where(key)); }
    std::optional<double> opt_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::uint64_t uinteger(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ParseError(where(key) + " must be a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::optional<std::uint64_t> opt_uinteger(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return uinteger(key);
    }

    std::string string(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_string()) throw ParseError(where(key) + " must be a string");
        return v.get<std::string>();
    }
    std::optional<std::string> opt_string(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return string(key);
    }

    bool boolean(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_boolean()) throw ParseError(where(key) + " must be true or false");
        return v.get<bool>();
    }
    std::optional<bool> opt_boolean(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return boolean(key);
    }

    Reader object(const std::string& key) { return Reader(raw(key), where(key)); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ParseError("unknown key '" + join(path_, it.key()) + "'");
    }

    static double as_number(const Json& v, const std::string& where) {
        if (!v.is_number()) throw ParseError(where + " must be a number");
        return v.get<double>();
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

// A vector of length d; a bare number is accepted when d == 1.
Eigen::VectorXd read_vector(const Json& v, std::size_t d, const std::string& where) {
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::VectorXd out(n);
    if (v.is_number()) {
        if (d != 1) throw ParseError(where + " must be an array of " + std::to_string(d) + " numbers");
        out[0] = v.get<double>();
        return out;
    }
    if (!v.is_array() || v.size() != d) throw ParseError(where + " must be an array of " + std::to_string(d) + " numbers");
    for (std::size_t i = 0; i < d; ++i)
        out[static_cast<Eigen::Index>(i)] = Reader::as_number(v[i], where + "[" + std::to_string(i) + "]");
    return out;
}

// A d x d matrix as an array of rows; a bare number is accepted when d == 1.
Eigen::MatrixXd read_matrix(const Json& v, std::size_t d, const std::string& where) {
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd out(n, n);
    if (v.is_number()) {
        if (d != 1) throw ParseError(where + " must be a " + std::to_string(d) + " x " + std::to_string(d) + " array");
        out(0, 0) = v.get<double>();
        return out;
    }
    if (!v.is_array() || v.size() != d)
        throw ParseError(where + " must be a " + std::to_string(d) + " x " + std::to_string(d) + " array");
    for (std::size_t i = 0; i < d; ++i) {
        const Eigen::VectorXd row = read_vector(v[i], d, where + "[" + std::to_string(i) + "]");
        if (!v[i].is_array()) throw ParseError(where + "[" + std::to_string(i) + "] must be an array");
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

std::vector<double> read_values(const Json& v, std::size_t d, const std::string& where) {
    const Eigen::VectorXd x = read_vector(v, d, where);
    return {x.data(), x.data() + x.size()};
}

Json vector_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

Json vector_json(const std::vector<double>& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

ColumnMap read_map(Reader r, std::size_t d) {
    ColumnMap m;
    if (r.has("offset")) m.offset = read_vector(r.raw("offset"), d, r.where("offset"));
    if (r.has("now")) m.now = read_matrix(r.raw("now"), d, r.where("now"));
    if (r.has("lagged")) m.lagged = read_matrix(r.raw("lagged"), d, r.where("lagged"));
    if (r.has("distributed")) m.distributed = read_matrix(r.raw("distributed"), d, r.where("distributed"));
    if (r.has("time_factor")) {
        Reader t = r.object("time_factor");
        m.time.kind = enum_value(time_factor_from_string, t.string("kind"), t.where("kind"));
        m.time.frequency = t.opt_number("frequency").value_or(1.0);
        t.finish();
    }
    r.finish();
    return m;
}

Json map_json(const ColumnMap& m) {
    Json j = Json::object();
    if (m.offset.size() != 0) j["offset"] = vector_json(m.offset);
    if (m.now.size() != 0) j["now"] = matrix_json(m.now);
    if (m.lagged.size() != 0) j["lagged"] = matrix_json(m.lagged);
    if (m.distributed.size() != 0) j["distributed"] = matrix_json(m.distributed);
    if (m.time.kind != TimeFactorKind::kNone)
        j["time_factor"] = Json{{"kind", std::string(to_string(m.time.kind))}, {"frequency", m.time.frequency}};
    return j;
}

std::vector<ColumnMap> read_columns(const Json& v, std::size_t d, std::size_t cols, const std::string& where) {
    if (!v.is_array() || v.size() != cols)
        throw ParseError(where + " must be an array of " + std::to_string(cols) + " column maps");
    std::vector<ColumnMap> out;
    for (std::size_t i = 0; i < cols; ++i) out.push_back(read_map(Reader(v[i], where + "[" + std::to_string(i) + "]"), d));
    return out;
}

CoefficientSpec read_coefficients(Reader r) {
    CoefficientSpec s;
    s.family = enum_value(family_from_string, r.string("family"), r.where("family"));
    {
        Reader dims = r.object("dims");
        s.state_dim = dims.uinteger("state");
        s.wiener_dim = dims.uinteger("wiener");
        s.driver_dim = dims.uinteger("driver");
        dims.finish();
    }
    if (s.state_dim == 0 || s.wiener_dim == 0 || s.driver_dim == 0)
        throw ConstraintError("coefficient dimensions must be positive");
    if (auto n = r.opt_string("nonlinearity")) s.nonlinearity = enum_value(nonlinearity_from_string, *n, r.where("nonlinearity"));
    if (auto tap = r.opt_number("tap")) s.tap = *tap;
    if (r.has("kernel")) {
        Reader k = r.object("kernel");
        s.kernel.kind = enum_value(kernel_from_string, k.string("kind"), k.where("kind"));
        s.kernel.rate = k.opt_number("rate").value_or(1.0);
        k.finish();
    }
    s.drift = read_map(r.object("drift"), s.state_dim);
    s.diffusion = read_columns(r.raw("diffusion"), s.state_dim, s.wiener_dim, r.where("diffusion"));
    s.driver = read_columns(r.raw("driver"), s.state_dim, s.driver_dim, r.where("driver"));
    if (r.has("constants")) {
        Reader c = r.object("constants");
        s.claimed.growth = c.opt_number("K");
        s.claimed.lipschitz = c.opt_number("K_R");
        s.claimed.beta = c.opt_number("beta");
        s.claimed.theta = c.opt_number("theta");
        c.finish();
    }
    r.finish();
    s.validate();
    return s;
}

InitialSpec read_initial(Reader r, std::size_t d) {
    InitialSpec s;
    s.kind = enum_value(initial_kind_from_string, r.string("kind"), r.where("kind"));
    s.value = read_values(r.raw("value"), d, r.where("value"));
    if (s.kind == InitialKind::kLinear) s.slope = read_values(r.raw("slope"), d, r.where("slope"));
    if (s.kind == InitialKind::kHolder) s.amplitude = read_values(r.raw("amplitude"), d, r.where("amplitude"));
    r.finish();
    return s;
}

Json initial_json(const InitialSpec& s) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(s.kind));
    j["value"] = vector_json(s.value);
    if (s.kind == InitialKind::kLinear) j["slope"] = vector_json(s.slope);
    if (s.kind == InitialKind::kHolder) j["amplitude"] = vector_json(s.amplitude);
    return j;
}

exp::Criteria read_criteria(Reader r) {
    exp::Criteria c;
    c.finest_exceedance_below = r.opt_number("finest_exceedance_below");
    c.exceedance_nonincreasing = r.opt_boolean("exceedance_nonincreasing");
    c.zero_distance = r.opt_boolean("zero_distance");
    if (auto n = r.opt_uinteger("mean_nonincreasing_at_least")) c.mean_nonincreasing_at_least = *n;
    c.mean_strictly_decreasing = r.opt_boolean("mean_strictly_decreasing");
    if (r.has("slope")) {
        Reader s = r.object("slope");
        c.slope_target = s.number("target");
        c.slope_tolerance = s.opt_number("tolerance").value_or(0.3);
        s.finish();
    }
    c.ratio_spread_below = r.opt_number("ratio_spread_below");
    c.oracle_within_se = r.opt_number("oracle_within_se");
    c.sup_moment_dominates_oracle = r.opt_boolean("sup_moment_dominates_oracle");
    c.stability_below = r.opt_number("stability_below");
    c.fail_on_heavy_tail = r.opt_boolean("fail_on_heavy_tail");
    c.assumptions_hold = r.opt_boolean("assumptions_hold");
    r.finish();
    return c;
}

Json criteria_json(const exp::Criteria& c) {
    Json j = Json::object();
    if (c.finest_exceedance_below) j["finest_exceedance_below"] = *c.finest_exceedance_below;
    if (c.exceedance_nonincreasing) j["exceedance_nonincreasing"] = *c.exceedance_nonincreasing;
    if (c.zero_distance) j["zero_distance"] = *c.zero_distance;
    if (c.mean_nonincreasing_at_least) j["mean_nonincreasing_at_least"] = *c.mean_nonincreasing_at_least;
    if (c.mean_strictly_decreasing) j["mean_strictly_decreasing"] = *c.mean_strictly_decreasing;
    if (c.slope_target)
        j["slope"] = Json{{"target", *c.slope_target}, {"tolerance", c.slope_tolerance.value_or(0.3)}};
    if (c.ratio_spread_below) j["ratio_spread_below"] = *c.ratio_spread_below;
    if (c.oracle_within_se) j["oracle_within_se"] = *c.oracle_within_se;
    if (c.sup_moment_dominates_oracle) j["sup_moment_dominates_oracle"] = *c.sup_moment_dominates_oracle;
    if (c.stability_below) j["stability_below"] = *c.stability_below;
    if (c.fail_on_heavy_tail) j["fail_on_heavy_tail"] = *c.fail_on_heavy_tail;
    if (c.assumptions_hold) j["assumptions_hold"] = *c.assumptions_hold;
    return j;
}

}  // namespace

CoefficientSpec coefficients_from_json(const Json& j) { return read_coefficients(Reader(j, "coefficients")); }

Json to_json(const CoefficientSpec& s) {
    Json j = Json::object();
    j["family"] = std::string(to_string(s.family));
    j["dims"] = Json{{"state", s.state_dim}, {"wiener", s.wiener_dim}, {"driver", s.driver_dim}};
    j["nonlinearity"] = std::string(to_string(s.nonlinearity));
    j["tap"] = s.tap;
    j["kernel"] = Json{{"kind", std::string(to_string(s.kernel.kind))}, {"rate", s.kernel.rate}};
    j["drift"] = map_json(s.drift);
    Json diff = Json::array(), drv = Json::array();
    for (const auto& m : s.diffusion) diff.push_back(map_json(m));
    for (const auto& m : s.driver) drv.push_back(map_json(m));
    j["diffusion"] = std::move(diff);
    j["driver"] = std::move(drv);
    Json c = Json::object();
    if (s.claimed.growth) c["K"] = *s.claimed.growth;
    if (s.claimed.lipschitz) c["K_R"] = *s.claimed.lipschitz;
    if (s.claimed.beta) c["beta"] = *s.claimed.beta;
    if (s.claimed.theta) c["theta"] = *s.claimed.theta;
    if (!c.empty()) j["constants"] = std::move(c);
    return j;
}

LoadedConfig parse_config(const Json& j) {
    Reader root(j, "");
    LoadedConfig out;
    out.seed = root.uinteger("seed");

    exp::ModelConfig& m = out.model;
    {
        Reader model = root.object("model");
        m.horizon = model.number("horizon");
        m.delay = model.number("delay");
        {
            Reader h = model.object("holder");
            m.holder.hurst = h.number("hurst");
            m.holder.gamma = h.number("gamma");
            m.holder.alpha = h.number("alpha");
            m.holder.beta = h.number("beta");
            m.holder.theta = h.number("theta");
            h.finish();
        }
        m.coefficients = read_coefficients(model.object("coefficients"));
        m.initial = read_initial(model.object("initial"), m.coefficients.state_dim);
        model.finish();
    }
    if (root.has("driver")) {
        Reader d = root.object("driver");
        m.driver_method = enum_value(exp::driver_method_from_string, d.opt_string("method").value_or("auto"), "driver.method");
        d.finish();
    }
    {
        Reader s = root.object("solver");
        m.steps = s.uinteger("steps");
        m.explosion_threshold = s.opt_number("explosion_threshold").value_or(1e8);
        m.scheme = enum_value(solver::scheme_from_string, s.opt_string("scheme").value_or("euler_mixed"), "solver.scheme");
        m.mollifier_level = s.opt_uinteger("mollifier_level").value_or(0);
        s.finish();
    }

    if (root.has("experiment")) {
        Reader e = root.object("experiment");
        exp::ExperimentConfig x;
        x.kind = enum_value(exp::kind_from_string, e.string("kind"), "experiment.kind");
        x.seed = out.seed;
        x.replicas = e.uinteger("replicas");
        const bool convergence = x.kind != exp::Kind::kMoments && x.kind != exp::Kind::kQuasiContract;
        if (convergence) x.epsilon = e.number("epsilon");
        else x.epsilon = e.opt_number("epsilon").value_or(0.1);
        const Json& levels = e.raw("levels");
        if (!levels.is_array()) throw ParseError("experiment.levels must be an array of numbers");
        for (std::size_t i = 0; i < levels.size(); ++i)
            x.levels.push_back(Reader::as_number(levels[i], "experiment.levels[" + std::to_string(i) + "]"));
        x.perturbation = enum_value(exp::perturbation_from_string, e.opt_string("perturbation").value_or("none"), "experiment.perturbation");
        if (e.has("truncation")) {
            Reader t = e.object("truncation");
            x.truncation.driver_bound = t.opt_number("M").value_or(10.0);
            x.truncation.solution_bound = t.opt_number("R").value_or(1e3);
            t.finish();
        }
        if (e.has("p")) {
            const double p = e.number("p");
            if (std::floor(p) != p || p < 1) throw ConstraintError("p must be a positive integer");
            x.power = static_cast<int>(p);
        }
        if (auto n = e.opt_uinteger("assumption_samples")) x.assumption_samples = *n;
        if (e.has("criteria")) x.criteria = read_criteria(e.object("criteria"));
        e.finish();
        x.model = m;
        out.experiment = std::move(x);
    }
    root.finish();

    m.validate();
    if (out.experiment) out.experiment->validate();
    return out;
}

LoadedConfig parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

Json to_json(const LoadedConfig& cfg) {
    const exp::ModelConfig& m = cfg.model;
    Json j = Json::object();
    j["seed"] = cfg.seed;
    Json model = Json::object();
    model["horizon"] = m.horizon;
    model["delay"] = m.delay;
    model["holder"] = Json{{"hurst", m.holder.hurst},
                           {"gamma", m.holder.gamma},
                           {"alpha", m.holder.alpha},
                           {"beta", m.holder.beta},
                           {"theta", m.holder.theta}};
    model["coefficients"] = to_json(m.coefficients);
    model["initial"] = initial_json(m.initial);
    j["model"] = std::move(model);
    j["driver"] = Json{{"method", std::string(exp::to_string(m.driver_method))}};
    Json s = Json::object();
    s["steps"] = m.steps;
    s["explosion_threshold"] = m.explosion_threshold;
    s["scheme"] = std::string(solver::to_string(m.scheme));
    if (m.scheme == solver::Scheme::kEulerIto) s["mollifier_level"] = m.mollifier_level;
    j["solver"] = std::move(s);
    if (cfg.experiment) {
        const exp::ExperimentConfig& x = *cfg.experiment;
        Json e = Json::object();
        e["kind"] = std::string(exp::to_string(x.kind));
        e["replicas"] = x.replicas;
        e["epsilon"] = x.epsilon;
        e["levels"] = vector_json(x.levels);
        e["perturbation"] = std::string(exp::to_string(x.perturbation));
        e["truncation"] = Json{{"M", x.truncation.driver_bound}, {"R", x.truncation.solution_bound}};
        if (x.kind == exp::Kind::kQuasiContract)
            e["p"] = x.power.value_or(x.model.holder.quasi_contraction_power());
        e["assumption_samples"] = x.assumption_samples;
        e["criteria"] = criteria_json(x.criteria);
        j["experiment"] = std::move(e);
    }
    return j;
}

}  // namespace mixsdde::config
