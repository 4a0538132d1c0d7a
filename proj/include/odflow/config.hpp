#ifndef odflow_config_hpp
#define odflow_config_hpp

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace odflow {

// Plain-text key=value configuration. Lines starting with '#' are comments.
// Values keep everything after the first '='; keys are unique (last wins).
class Config {
public:
    Config() = default;

    static Config parse(std::istream& in);
    static Config load(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Comma-separated list value.
    std::vector<std::string> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { kv_[key] = value; }

    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

}  // namespace odflow

#endif
