#pragma once

// Flat run configuration:
//
//     # comment
//     eps0 = 0.05          <- applies to every subcommand
//     [mlt]
//     x0 = 1800, 100, 50   <- applies to `mlt` only
//
// Values stay strings until a subcommand resolves them against its own key
// table, so unknown keys can be rejected per subcommand.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace icesheet {

class ConfigFile {
public:
    static ConfigFile parse(std::istream& in, const std::string& origin = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    /// Keys of the top-level block ("") or of a [section].
    const std::map<std::string, std::string>& section(const std::string& name) const;
    bool has_section(const std::string& name) const { return sections_.count(name) > 0; }
    std::vector<std::string> section_names() const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Typed conversions; all throw ConfigError naming the key.
double parse_double(const std::string& key, const std::string& value);
std::size_t parse_count(const std::string& key, const std::string& value);
std::uint64_t parse_seed(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
/// Comma-separated doubles; at least one.
std::vector<double> parse_list(const std::string& key, const std::string& value);

/// Resolves the effective key = value set for one subcommand: built-in
/// defaults, overridden by the config file (top level, then the
/// subcommand's section), overridden by explicit command-line values.
class Settings {
public:
    struct Key {
        std::string name;
        std::string default_value;  ///< empty = unset unless given
        std::string help;
    };

    Settings(std::string command, std::vector<Key> keys);

    const std::string& command() const { return command_; }
    const std::vector<Key>& keys() const { return keys_; }

    /// Throws ConfigError on keys the subcommand does not know.
    void apply_file(const ConfigFile& file);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    const std::string& raw(const std::string& key) const;
    double number(const std::string& key) const;
    std::size_t count(const std::string& key) const;
    std::uint64_t seed(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    /// All set keys with their effective string values, sorted.
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    const Key& find(const std::string& key) const;

    std::string command_;
    std::vector<Key> keys_;
    std::map<std::string, std::string> values_;
};

}  // namespace icesheet
