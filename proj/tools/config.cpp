#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace kamred::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (full == "cocycle.mode") {
            cfg.modes_.push_back(value);
            cfg.lines_[full] = lineno;
            continue;
        }
        if (cfg.values_.count(full))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + full + "'");
        cfg.values_[full] = value;
        cfg.lines_[full] = lineno;
    }
    cfg.command = cfg.get_or("command", "");
    return cfg;
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw ConfigError(origin_ + ": missing required key '" + key + "'");
    return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
    const std::string& v = get(key);
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not a number: '" + v + "'");
    }
}

double Config::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
    double x = get_double(key);
    long long n = static_cast<long long>(x);
    if (static_cast<double>(n) != x)
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer");
    return n;
}

long long Config::get_int_or(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool_or(const std::string& key, bool fallback) const {
    if (!has(key))
        return fallback;
    std::string v = get(key);
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::istringstream in(get(key));
    std::vector<double> out;
    double x;
    while (in >> x)
        out.push_back(x);
    if (!in.eof())
        throw ConfigError(origin_ + ": key '" + key + "' is not a list of numbers");
    return out;
}

void Config::validate_keys(const std::vector<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
        if (key == "command")
            continue;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            auto ln = lines_.find(key);
            throw ConfigError(origin_ + ":" + std::to_string(ln == lines_.end() ? 0 : ln->second) +
                              ": unknown key '" + key + "' for command '" + command + "'");
        }
    }
    if (!modes_.empty() &&
        std::find(allowed.begin(), allowed.end(), "cocycle.mode") == allowed.end())
        throw ConfigError(origin_ + ": 'cocycle.mode' not accepted by command '" + command + "'");
}

} // namespace kamred::cli
