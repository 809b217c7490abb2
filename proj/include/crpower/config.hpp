#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crpower {

/// Raised for malformed or out-of-range configuration. `key()` names the
/// offending entry so the CLI can point the user at it.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message);

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Flat `section.name = value` text. '#' starts a comment; blank lines are
/// ignored. Duplicate keys are rejected.
class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::string& path);

    bool contains(const std::string& key) const;
    const std::string& raw(const std::string& key) const;

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long long integer(const std::string& key) const;
    long long integer_or(const std::string& key, long long fallback) const;
    bool boolean_or(const std::string& key, bool fallback) const;
    std::string string_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> number_list(const std::string& key) const;

    /// Marks a key as understood; `unused_keys()` reports the rest.
    void touch(const std::string& key) const;
    std::vector<std::string> unused_keys() const;
    std::vector<std::string> keys() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };
    std::map<std::string, Entry> entries_;
};

/// Parses a comma separated list of numbers ("1e-13, 1e-12").
std::vector<double> parse_number_list(std::string_view text, const std::string& key);

}  // namespace crpower
