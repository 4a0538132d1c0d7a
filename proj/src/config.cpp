#include "odflow/config.hpp"

#include <fstream>
#include <sstream>

#include "odflow/error.hpp"
#include "odflow/util.hpp"

namespace odflow {

Config Config::parse(std::istream& in) {
    Config cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto s = util::trim(line);
        if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
        if (s.empty() || s.front() == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw SchemaError("config: missing '=' at line " + std::to_string(line_no));
        auto key = util::trim(s.substr(0, eq));
        auto val = util::trim(s.substr(eq + 1));
        if (key.empty())
            throw SchemaError("config: empty key at line " + std::to_string(line_no));
        cfg.kv_[std::string(key)] = std::string(val);
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw SchemaError("config: cannot open '" + path + "'");
    return parse(in);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    double v;
    if (!util::parse_double(it->second, v))
        throw SchemaError("config: key '" + key + "' is not a number");
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    long long v;
    if (!util::parse_long(it->second, v))
        throw SchemaError("config: key '" + key + "' is not an integer");
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw SchemaError("config: key '" + key + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = kv_.find(key);
    if (it == kv_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = util::trim(item);
        if (!t.empty()) out.emplace_back(t);
    }
    return out;
}

}  // namespace odflow
