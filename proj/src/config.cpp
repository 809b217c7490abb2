#include "crpower/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace crpower {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& text, const std::string& key) {
    if (text.empty()) throw ConfigError(key, "expected a number, got an empty value");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError(key, "expected a number, got '" + text + "'");
    }
    return v;
}

}  // namespace

ConfigError::ConfigError(std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

KeyValueFile KeyValueFile::parse(std::string_view text) {
    KeyValueFile file;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(number) + ": expected 'key = value'");
        }
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("", "line " + std::to_string(number) + ": missing key");
        }
        if (file.entries_.count(key)) {
            throw ConfigError(key, "duplicate key (line " + std::to_string(number) + ")");
        }
        file.entries_.emplace(std::move(key), Entry{std::move(value), number, false});
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool KeyValueFile::contains(const std::string& key) const { return entries_.count(key) != 0; }

const std::string& KeyValueFile::raw(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(key, "missing required key");
    it->second.used = true;
    return it->second.value;
}

double KeyValueFile::number(const std::string& key) const { return to_double(raw(key), key); }

double KeyValueFile::number_or(const std::string& key, double fallback) const {
    return contains(key) ? number(key) : fallback;
}

long long KeyValueFile::integer(const std::string& key) const {
    const std::string& text = raw(key);
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError(key, "expected an integer, got '" + text + "'");
    }
    return v;
}

long long KeyValueFile::integer_or(const std::string& key, long long fallback) const {
    return contains(key) ? integer(key) : fallback;
}

bool KeyValueFile::boolean_or(const std::string& key, bool fallback) const {
    if (!contains(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::string KeyValueFile::string_or(const std::string& key, const std::string& fallback) const {
    return contains(key) ? raw(key) : fallback;
}

std::vector<double> KeyValueFile::number_list(const std::string& key) const {
    return parse_number_list(raw(key), key);
}

void KeyValueFile::touch(const std::string& key) const {
    if (const auto it = entries_.find(key); it != entries_.end()) it->second.used = true;
}

std::vector<std::string> KeyValueFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, e] : entries_) {
        if (!e.used) out.push_back(k);
    }
    return out;
}

std::vector<std::string> KeyValueFile::keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [k, e] : entries_) out.push_back(k);
    return out;
}

std::vector<double> parse_number_list(std::string_view text, const std::string& key) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        if (comma == std::string_view::npos) comma = text.size();
        const std::string item = trim(text.substr(start, comma - start));
        if (item.empty()) throw ConfigError(key, "empty entry in number list");
        out.push_back(to_double(item, key));
        start = comma + 1;
    }
    return out;
}

}  // namespace crpower
