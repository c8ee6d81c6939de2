#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scalenet {

enum class KeyType { integer, unsigned_integer, real, boolean, text, real_list, integer_list };

struct ConfigKey {
    std::string_view name;
    KeyType type;
    std::string_view default_value;
    std::string_view help;
};

/// Every recognised key with its type and default.
const std::vector<ConfigKey>& config_keys();

/// Flat typed key-value configuration. File syntax is one `key = value` per
/// line; `#` starts a comment; lists are comma-separated. Unknown keys and
/// ill-typed values are rejected when set.
class Config {
public:
    Config();

    static Config load(const std::filesystem::path& path);
    /// Parses "key=value" (as given on the command line) and applies it.
    void apply_override(std::string_view assignment);
    void set(std::string_view key, std::string_view value);

    const std::string& raw(std::string_view key) const;
    std::int64_t get_int(std::string_view key) const;
    std::uint64_t get_uint(std::string_view key) const;
    double get_double(std::string_view key) const;
    bool get_bool(std::string_view key) const;
    const std::string& get_string(std::string_view key) const { return raw(key); }
    std::vector<double> get_reals(std::string_view key) const;
    std::vector<int> get_ints(std::string_view key) const;

    /// Canonical text form: every key in table order, `key = value`.
    std::string dump() const;

private:
    std::map<std::string, std::string, std::less<>> values_;
};

/// Human-readable key reference (used by `--help`).
std::string describe_config_keys();

}  // namespace scalenet
