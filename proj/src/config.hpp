#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lomaq {

/// Flat INI-style configuration: [section] headers, key = value lines, '#' or
/// ';' comments. Every typed lookup records the resolved value (default or
/// explicit), so a manifest can list exactly what a run used.
class Config {
public:
    Config() = default;

    static Config load(const std::string &path);
    static Config parse(const std::string &text);

    void set(const std::string &section, const std::string &key, const std::string &value);
    bool has(const std::string &section, const std::string &key) const;

    std::string get_str(const std::string &section, const std::string &key,
                        const std::string &def) const;
    long get_int(const std::string &section, const std::string &key, long def) const;
    double get_real(const std::string &section, const std::string &key, double def) const;
    bool get_bool(const std::string &section, const std::string &key, bool def) const;
    std::vector<uint64_t> get_seeds(const std::string &section, const std::string &key,
                                    const std::vector<uint64_t> &def) const;

    using Table = std::map<std::string, std::map<std::string, std::string>>;
    const Table &raw() const { return values_; }
    const Table &resolved() const { return resolved_; }

private:
    void note(const std::string &section, const std::string &key, const std::string &value) const;

    Table values_;
    mutable Table resolved_;
};

} // namespace lomaq
