#include "plfem/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "plfem/errors.hpp"

namespace plfem {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

} // namespace

Config Config::parse(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str());
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("config: cannot open " + path);
    return parse(in);
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    cfg.hash_ = h;

    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw InvalidParameter("config: malformed section header at line " +
                                       std::to_string(lineno));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter("config: expected 'key = value' at line " +
                                   std::to_string(lineno));
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw InvalidParameter("config: empty key at line " + std::to_string(lineno));
        }
        if (cfg.values_[section].count(key)) {
            throw InvalidParameter("config: duplicate key '" + key + "' in section [" +
                                   section + "]");
        }
        cfg.values_[section][key] = value;
        cfg.ordered_.emplace_back(section, key, value);
    }
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    return sec != values_.end() && sec->second.count(key) > 0;
}

std::optional<std::string> Config::get(const std::string& section, const std::string& key) const {
    const auto sec = values_.find(section);
    if (sec == values_.end()) return std::nullopt;
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) return std::nullopt;
    return it->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const auto v = get(section, key);
    return v ? *v : fallback;
}

std::string Config::require_string(const std::string& section, const std::string& key) const {
    const auto v = get(section, key);
    if (!v) {
        throw InvalidParameter("config: missing required key '" + key + "' in section [" +
                               section + "]");
    }
    return *v;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const double parsed = std::strtod(v->c_str(), &end);
    if (end == v->c_str() || *end != '\0') {
        throw InvalidParameter("config: key '" + key + "' is not a number: " + *v);
    }
    return parsed;
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    char* end = nullptr;
    const long parsed = std::strtol(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0') {
        throw InvalidParameter("config: key '" + key + "' is not an integer: " + *v);
    }
    return static_cast<int>(parsed);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const auto v = get(section, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw InvalidParameter("config: key '" + key + "' is not a boolean: " + *v);
}

std::vector<int> Config::get_int_list(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    const auto v = get(section, key);
    if (!v || v->empty()) return out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> Config::section_entries(
    const std::string& section) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [sec, key, value] : ordered_) {
        if (sec == section) out.emplace_back(key, value);
    }
    return out;
}

} // namespace plfem
