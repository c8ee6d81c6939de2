#include "scalenet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scalenet {

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = {
        {"seed", KeyType::unsigned_integer, "0", "root seed; all randomness derives from it"},
        {"model", KeyType::text, "ours", "ours | mlp1 | mlp2_r | mlp2_i"},
        {"folds", KeyType::integer, "5", "cross-validation folds (stratified)"},
        {"epochs", KeyType::integer, "500", "full-batch training epochs"},
        {"lr_weights", KeyType::real, "0.01", "AdamW learning rate for classifier weights and bias"},
        {"lr_scales", KeyType::real, "0.01", "AdamW learning rate for the log-scales"},
        {"weight_decay", KeyType::real, "0.01", "decoupled weight decay on weight matrices"},
        {"num_scales", KeyType::integer, "16", "number of trainable scales J"},
        {"scale_init_min", KeyType::real, "0.1", "lower end of the log-uniform scale initialisation"},
        {"scale_init_max", KeyType::real, "10", "upper end of the log-uniform scale initialisation"},
        {"kernel_alpha", KeyType::real, "2", "band-pass rise exponent"},
        {"kernel_beta", KeyType::real, "2", "band-pass decay exponent"},
        {"kernel_x1", KeyType::real, "1", "lower spline knot"},
        {"kernel_x2", KeyType::real, "2", "upper spline knot"},
        {"kernel_solve", KeyType::boolean, "true", "solve cubic coefficients from C1 conditions (else use kernel_coeffs)"},
        {"kernel_coeffs", KeyType::real_list, "-5,11,-6,1", "cubic coefficients c0..c3 when kernel_solve=false"},
        {"activation", KeyType::text, "relu", "relu | tanh | identity"},
        {"freeze_scales", KeyType::boolean, "false", "keep scales at their initial values"},
        {"normalize_eigenvalues", KeyType::boolean, "true", "divide eigenvalues by the largest one (false = raw)"},
        {"standardize", KeyType::text, "zscore", "zscore | center"},
        {"oversample", KeyType::boolean, "true", "apply ADASYN to each training split"},
        {"adasyn_neighbors", KeyType::integer, "5", "ADASYN neighbourhood size K"},
        {"adasyn_balance", KeyType::real, "1", "ADASYN balance level in (0, 1]"},
        {"mlp2_r_budget", KeyType::integer, "0", "parameter budget for mlp2_r (0 = match ours at num_scales)"},
        {"saliency_target", KeyType::text, "probability", "probability | logit"},
        {"sweep_scales", KeyType::integer_list, "2,4,8,16,32,64", "J values for the sweep command"},
        {"converge_lrs", KeyType::real_list, "0.01,0.1", "shared learning rates for the converge command"},
        {"converge_threshold", KeyType::real, "0.6", "test accuracy threshold for epochs-to-threshold"},
        {"threads", KeyType::integer, "1", "folds trained concurrently"},
        {"synth_p", KeyType::integer, "40", "synthetic feature count"},
        {"synth_n", KeyType::integer, "200", "synthetic sample count"},
        {"synth_classes", KeyType::integer, "2", "synthetic class count"},
        {"synth_informative", KeyType::integer, "4", "directions carrying class signal"},
        {"synth_strength", KeyType::real, "2", "class-mean magnitude per informative direction"},
        {"synth_noise", KeyType::real, "1", "noise standard deviation scale"},
        {"synth_priors", KeyType::real_list, "", "relative class sizes (empty = 2:1:...)"},
        {"synth_basis", KeyType::text, "random", "random | identity"},
    };
    return keys;
}

namespace {

const ConfigKey& find_key(std::string_view name) {
    const auto& keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const ConfigKey& k) { return k.name == name; });
    if (it == keys.end()) throw std::invalid_argument("unknown config key '" + std::string(name) + "'");
    return *it;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_bool(std::string_view s, bool& out) {
    if (s == "true" || s == "1" || s == "yes") return out = true, true;
    if (s == "false" || s == "0" || s == "no") return out = false, true;
    return false;
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(',', start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

void check_value(const ConfigKey& key, std::string_view value) {
    bool ok = true;
    switch (key.type) {
        case KeyType::integer: {
            std::int64_t v;
            ok = parse_number(value, v);
            break;
        }
        case KeyType::unsigned_integer: {
            std::uint64_t v;
            ok = parse_number(value, v);
            break;
        }
        case KeyType::real: {
            double v;
            ok = parse_number(value, v) && std::isfinite(v);
            break;
        }
        case KeyType::boolean: {
            bool v;
            ok = parse_bool(value, v);
            break;
        }
        case KeyType::text: break;
        case KeyType::real_list:
            for (auto item : split_list(value)) {
                double v;
                ok = ok && parse_number(item, v) && std::isfinite(v);
            }
            break;
        case KeyType::integer_list:
            for (auto item : split_list(value)) {
                int v;
                ok = ok && parse_number(item, v);
            }
            break;
    }
    if (!ok) {
        throw std::invalid_argument("config key '" + std::string(key.name) + "': cannot parse value '" +
                                    std::string(value) + "'");
    }
}

}  // namespace

Config::Config() {
    for (const auto& k : config_keys()) values_.emplace(std::string(k.name), std::string(k.default_value));
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());
    Config cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        }
        cfg.set(trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    }
    return cfg;
}

void Config::apply_override(std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void Config::set(std::string_view key, std::string_view value) {
    const ConfigKey& info = find_key(key);
    check_value(info, trim(value));
    values_[std::string(info.name)] = std::string(trim(value));
}

const std::string& Config::raw(std::string_view key) const {
    find_key(key);
    return values_.find(key)->second;
}

std::int64_t Config::get_int(std::string_view key) const {
    std::int64_t v = 0;
    parse_number(raw(key), v);
    return v;
}

std::uint64_t Config::get_uint(std::string_view key) const {
    std::uint64_t v = 0;
    parse_number(raw(key), v);
    return v;
}

double Config::get_double(std::string_view key) const {
    double v = 0.0;
    parse_number(raw(key), v);
    return v;
}

bool Config::get_bool(std::string_view key) const {
    bool v = false;
    parse_bool(raw(key), v);
    return v;
}

std::vector<double> Config::get_reals(std::string_view key) const {
    std::vector<double> out;
    for (auto item : split_list(raw(key))) {
        double v = 0.0;
        parse_number(item, v);
        out.push_back(v);
    }
    return out;
}

std::vector<int> Config::get_ints(std::string_view key) const {
    std::vector<int> out;
    for (auto item : split_list(raw(key))) {
        int v = 0;
        parse_number(item, v);
        out.push_back(v);
    }
    return out;
}

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& k : config_keys()) out << k.name << " = " << values_.find(k.name)->second << '\n';
    return out.str();
}

std::string describe_config_keys() {
    std::ostringstream out;
    for (const auto& k : config_keys()) {
        out << "  " << k.name << " (default: " << (k.default_value.empty() ? "<empty>" : k.default_value)
            << ")\n      " << k.help << '\n';
    }
    return out.str();
}

}  // namespace scalenet
