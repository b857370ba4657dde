#pragma once

#include "bspc/arma.hpp"
#include "bspc/mc.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bspc {

/// Flat `key = value` settings. Lines starting with '#' are comments; list
/// values are comma separated. Unknown keys are rejected. A JSON report
/// produced by the CLI can also be loaded: its "config" object is used.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    /// Throws Config for unknown keys.
    void set(const std::string& key, const std::string& value);
    /// `key=value` override as given on the command line.
    void apply_override(std::string_view assignment);

    bool has(const std::string& key) const { return values_.contains(key); }
    /// Explicit value, else the schema default.
    std::string get(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<std::size_t> get_sizes(const std::string& key) const;

    /// Every schema key with its effective value.
    std::map<std::string, std::string> resolved() const;
    /// Canonical text form of resolved(); parse(text()) resolves identically.
    std::string text() const;

    static const std::map<std::string, std::string>& schema_defaults();

private:
    std::map<std::string, std::string> values_;
};

ArmaShape shape_from(const KeyValueConfig& cfg);
ArmaSpec spec_from(const KeyValueConfig& cfg);
ScenarioSpec scenario_from(const KeyValueConfig& cfg);

}  // namespace bspc
