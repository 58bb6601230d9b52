#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace lomaq {

namespace {

std::string trim(const std::string &s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
        ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
        --b;
    return s.substr(a, b - a);
}

} // namespace

Config Config::load(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

Config Config::parse(const std::string &text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any section");
        cfg.values_[section][key] = value;
    }
    return cfg;
}

void Config::set(const std::string &section, const std::string &key, const std::string &value) {
    values_[section][key] = value;
}

bool Config::has(const std::string &section, const std::string &key) const {
    const auto sit = values_.find(section);
    return sit != values_.end() && sit->second.count(key) > 0;
}

void Config::note(const std::string &section, const std::string &key,
                  const std::string &value) const {
    resolved_[section][key] = value;
}

std::string Config::get_str(const std::string &section, const std::string &key,
                            const std::string &def) const {
    std::string out = def;
    const auto sit = values_.find(section);
    if (sit != values_.end()) {
        const auto kit = sit->second.find(key);
        if (kit != sit->second.end())
            out = kit->second;
    }
    note(section, key, out);
    return out;
}

long Config::get_int(const std::string &section, const std::string &key, long def) const {
    const std::string s = get_str(section, key, std::to_string(def));
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("config " + section + "." + key + ": '" + s + "' is not an integer");
    }
}

double Config::get_real(const std::string &section, const std::string &key, double def) const {
    std::ostringstream oss;
    oss << def;
    const std::string s = get_str(section, key, oss.str());
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception &) {
        throw ConfigError("config " + section + "." + key + ": '" + s + "' is not a number");
    }
}

bool Config::get_bool(const std::string &section, const std::string &key, bool def) const {
    std::string s = get_str(section, key, def ? "true" : "false");
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    throw ConfigError("config " + section + "." + key + ": '" + s + "' is not a boolean");
}

std::vector<uint64_t> Config::get_seeds(const std::string &section, const std::string &key,
                                        const std::vector<uint64_t> &def) const {
    std::string def_str;
    for (size_t i = 0; i < def.size(); ++i) {
        if (i)
            def_str += ",";
        def_str += std::to_string(def[i]);
    }
    const std::string s = get_str(section, key, def_str);
    std::vector<uint64_t> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, ',')) {
        token = trim(token);
        if (token.empty())
            continue;
        try {
            out.push_back(std::stoull(token));
        } catch (const std::exception &) {
            throw ConfigError("config " + section + "." + key + ": bad seed '" + token + "'");
        }
    }
    if (out.empty())
        throw ConfigError("config " + section + "." + key + ": seed list must be non-empty");
    return out;
}

} // namespace lomaq
