// Flat "key = value" configuration files with [section] headers.
// No nesting; '#' starts a comment; keys are unique per section.
#ifndef PLFEM_CONFIG_HPP
#define PLFEM_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace plfem {

class Config {
public:
    static Config parse(std::istream& in);
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::optional<std::string> get(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::string require_string(const std::string& section, const std::string& key) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& section, const std::string& key) const;

    // All keys of one section, in file order.
    std::vector<std::pair<std::string, std::string>> section_entries(
        const std::string& section) const;

    // FNV-1a hash of the raw file contents, for run manifests.
    std::uint64_t content_hash() const { return hash_; }

private:
    std::map<std::string, std::map<std::string, std::string>> values_;
    std::vector<std::tuple<std::string, std::string, std::string>> ordered_;
    std::uint64_t hash_ = 0;
};

} // namespace plfem

#endif
