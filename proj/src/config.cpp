#include "bspc/config.hpp"

#include "bspc/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bspc {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& raw) {
    std::string_view s(raw);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw Error(ErrorKind::Config, "key '" + key + "': '" + raw + "' is not a number");
    return v;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& raw) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (raw.empty() || ec != std::errc() || ptr != raw.data() + raw.size())
        throw Error(ErrorKind::Config, "key '" + key + "': '" + raw + "' is not an integer");
    return v;
}

}  // namespace

const std::map<std::string, std::string>& KeyValueConfig::schema_defaults() {
    static const std::map<std::string, std::string> defaults = {
        // model
        {"ar_order", "1"},
        {"ma_order", "1"},
        {"intercept", "true"},
        {"phi0", "1"},
        {"phi", "0.2"},
        {"theta", "0.5"},
        {"sigma2", "1"},
        {"innovations", "gaussian"},
        {"burn_in", "200"},
        // charts
        {"alpha", "0.01"},
        {"ewma_lambda", "0.2"},
        {"seed", "1"},
        {"threads", "0"},
        // simulate
        {"batches", "30"},
        {"length", "200"},
        {"label", ""},
        {"id_prefix", "b"},
        // simulated monitoring run
        {"shift_level", "0.6"},
        {"new_batches", "20"},
        // Monte Carlo scenario
        {"disturbed_param", "phi1"},
        {"levels", "-0.2,0,0.1,0.2,0.3,0.6"},
        {"phase1_batches", "30,50,100"},
        {"batch_lengths", "100,200,500,1000"},
        {"phase2_batches", "500"},
        {"replications", "1000"},
        // Phase I / application
        {"format", "csv-wide"},
        {"reference_label", "1"},
        {"reference_size", "0"},
        {"subset", "all"},
        {"screen_level", "0.05"},
        {"screen_threshold", "0.95"},
        {"apply_sizes", "10,30,100,200,300,500"},
        {"apply_alphas", "0.10,0.05,0.01"},
        {"apply_replications", "200"},
    };
    return defaults;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    if (!schema_defaults().contains(key)) throw Error(ErrorKind::Config, "unknown configuration key '" + key + "'");
    values_[key] = value;
}

void KeyValueConfig::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw Error(ErrorKind::Config, "override '" + std::string(assignment) + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::Config, "config line " + std::to_string(number) + " is not 'key = value'");
        cfg.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (path.extension() == ".json") {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(buf.str());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::Config, "config report '" + path.string() + "' is not valid JSON: " + e.what());
        }
        if (!doc.contains("config") || !doc["config"].is_object())
            throw Error(ErrorKind::Config, "JSON report '" + path.string() + "' has no config object");
        KeyValueConfig cfg;
        for (const auto& [k, v] : doc["config"].items()) cfg.set(k, v.get<std::string>());
        return cfg;
    }
    return parse(buf.str());
}

std::string KeyValueConfig::get(const std::string& key) const {
    if (const auto it = values_.find(key); it != values_.end()) return it->second;
    const auto& d = schema_defaults();
    if (const auto it = d.find(key); it != d.end()) return it->second;
    throw Error(ErrorKind::Config, "unknown configuration key '" + key + "'");
}

double KeyValueConfig::get_double(const std::string& key) const { return to_double(key, get(key)); }
std::int64_t KeyValueConfig::get_int(const std::string& key) const { return to_integer<std::int64_t>(key, get(key)); }
std::uint64_t KeyValueConfig::get_uint(const std::string& key) const { return to_integer<std::uint64_t>(key, get(key)); }

bool KeyValueConfig::get_bool(const std::string& key) const {
    const std::string v = get(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorKind::Config, "key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split_list(get(key))) out.push_back(to_double(key, item));
    return out;
}

std::vector<std::size_t> KeyValueConfig::get_sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(get(key))) out.push_back(to_integer<std::size_t>(key, item));
    return out;
}

std::map<std::string, std::string> KeyValueConfig::resolved() const {
    std::map<std::string, std::string> out = schema_defaults();
    for (const auto& [k, v] : values_) out[k] = v;
    return out;
}

std::string KeyValueConfig::text() const {
    std::string out;
    for (const auto& [k, v] : resolved()) out += k + " = " + v + "\n";
    return out;
}

ArmaShape shape_from(const KeyValueConfig& cfg) {
    ArmaShape shape;
    shape.ar_order = static_cast<std::size_t>(cfg.get_uint("ar_order"));
    shape.ma_order = static_cast<std::size_t>(cfg.get_uint("ma_order"));
    shape.intercept = cfg.get_bool("intercept");
    if (shape.dim() == 0) throw Error(ErrorKind::Config, "model must have at least one coefficient");
    return shape;
}

ArmaSpec spec_from(const KeyValueConfig& cfg) {
    const ArmaShape shape = shape_from(cfg);
    ArmaSpec spec;
    spec.intercept = shape.intercept;
    spec.phi0 = shape.intercept ? cfg.get_double("phi0") : 0.0;
    spec.phi = cfg.get_doubles("phi");
    spec.theta = cfg.get_doubles("theta");
    if (spec.phi.size() != shape.ar_order)
        throw Error(ErrorKind::Config, "phi lists " + std::to_string(spec.phi.size()) + " values but ar_order is " +
                                           std::to_string(shape.ar_order));
    if (spec.theta.size() != shape.ma_order)
        throw Error(ErrorKind::Config, "theta lists " + std::to_string(spec.theta.size()) + " values but ma_order is " +
                                           std::to_string(shape.ma_order));
    spec.sigma2 = cfg.get_double("sigma2");
    const std::string innov = cfg.get("innovations");
    if (innov == "gaussian")
        spec.innovations = Innovations::Gaussian;
    else if (innov == "uniform")
        spec.innovations = Innovations::Uniform;
    else
        throw Error(ErrorKind::Config, "innovations must be gaussian or uniform");
    if (!(spec.sigma2 > 0.0)) throw Error(ErrorKind::Config, "sigma2 must be positive");
    return spec;
}

ScenarioSpec scenario_from(const KeyValueConfig& cfg) {
    ScenarioSpec s;
    s.in_control = spec_from(cfg);
    s.disturbed = DisturbedParam::parse(cfg.get("disturbed_param"));
    s.levels = cfg.get_doubles("levels");
    s.I_grid = cfg.get_sizes("phase1_batches");
    s.T_grid = cfg.get_sizes("batch_lengths");
    s.phase2_batches = static_cast<std::size_t>(cfg.get_uint("phase2_batches"));
    s.replications = static_cast<std::size_t>(cfg.get_uint("replications"));
    s.alpha = cfg.get_double("alpha");
    s.lambda = cfg.get_double("ewma_lambda");
    s.burn_in = static_cast<std::size_t>(cfg.get_uint("burn_in"));
    s.seed = cfg.get_uint("seed");
    s.validate();
    return s;
}

}  // namespace bspc
