#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kamred::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key-value experiment file with [section] headers.  Keys are stored
/// as "section.key"; `mode` entries under [cocycle] may repeat, everything
/// else is single-valued.  Unknown keys are rejected against a per-command
/// registry at validation time, not silently ignored.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    std::string get_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    const std::vector<std::string>& modes() const { return modes_; }

    /// The command, from the file or overridden by the caller.
    std::string command;

    /// Rejects keys outside the allowed set for the command.
    void validate_keys(const std::vector<std::string>& allowed) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    std::vector<std::string> modes_;
    std::string origin_;
};

} // namespace kamred::cli
