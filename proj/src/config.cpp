#include "icesheet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "icesheet/errors.hpp"

namespace icesheet {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool valid_name(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& origin) {
    ConfigFile cfg;
    cfg.sections_[""];
    std::string current;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header");
            current = trim(line.substr(1, line.size() - 2));
            if (!valid_name(current)) throw ConfigError(where + "bad section name '" + current + "'");
            cfg.sections_[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key)) throw ConfigError(where + "bad key '" + key + "'");
        if (value.empty()) throw ConfigError(where + "empty value for '" + key + "'");
        if (!cfg.sections_[current].emplace(key, value).second) {
            throw ConfigError(where + "duplicate key '" + key + "'");
        }
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    return parse(in, path.string());
}

const std::map<std::string, std::string>& ConfigFile::section(const std::string& name) const {
    static const std::map<std::string, std::string> empty;
    const auto it = sections_.find(name);
    return it == sections_.end() ? empty : it->second;
}

std::vector<std::string> ConfigFile::section_names() const {
    std::vector<std::string> names;
    for (const auto& [name, _] : sections_) names.push_back(name);
    return names;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError("'" + key + "': expected a number, got '" + value + "'");
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::size_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "': expected a non-negative integer, got '" + value + "'");
    }
    return out;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
        throw ConfigError("'" + key + "': expected an unsigned 64-bit integer, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("'" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
    if (out.empty()) throw ConfigError("'" + key + "': empty list");
    return out;
}

Settings::Settings(std::string command, std::vector<Key> keys) : command_(std::move(command)), keys_(std::move(keys)) {
    for (const auto& k : keys_) {
        if (!k.default_value.empty()) values_[k.name] = k.default_value;
    }
}

const Settings::Key& Settings::find(const std::string& key) const {
    for (const auto& k : keys_) {
        if (k.name == key) return k;
    }
    throw ConfigError("unknown key '" + key + "' for '" + command_ + "'");
}

void Settings::apply_file(const ConfigFile& file) {
    for (const auto& name : file.section_names()) {
        if (!name.empty() && name != command_) continue;
        for (const auto& [key, value] : file.section(name)) {
            find(key);
            values_[key] = value;
        }
    }
}

void Settings::set(const std::string& key, const std::string& value) {
    find(key);
    values_[key] = value;
}

bool Settings::has(const std::string& key) const {
    find(key);
    return values_.count(key) > 0;
}

const std::string& Settings::raw(const std::string& key) const {
    find(key);
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("'" + key + "' is required for '" + command_ + "'");
    return it->second;
}

double Settings::number(const std::string& key) const { return parse_double(key, raw(key)); }
std::size_t Settings::count(const std::string& key) const { return parse_count(key, raw(key)); }
std::uint64_t Settings::seed(const std::string& key) const { return parse_seed(key, raw(key)); }
bool Settings::flag(const std::string& key) const { return parse_bool(key, raw(key)); }
std::vector<double> Settings::list(const std::string& key) const { return parse_list(key, raw(key)); }

}  // namespace icesheet
