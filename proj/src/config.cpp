#include "smattn/config.hpp"

#include <fstream>
#include <sstream>

namespace smattn {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

RunConfig RunConfig::from_string(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": empty section name");
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        cfg.sections_[section][key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

void RunConfig::apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    const auto dot = spec.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("bad --set value '" + spec + "' (expected section.key=value)");
    set(trim(spec.substr(0, dot)), trim(spec.substr(dot + 1, eq - dot - 1)),
        trim(spec.substr(eq + 1)));
}

void RunConfig::set(const std::string& section, const std::string& key,
                    std::string value) {
    if (section.empty() || key.empty())
        throw ConfigError("config set: empty section or key");
    sections_[section][key] = std::move(value);
}

bool RunConfig::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
}

std::string RunConfig::get_str(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end() || s->second.count(key) == 0)
        throw ConfigError("missing config value " + section + "." + key);
    return s->second.at(key);
}

std::string RunConfig::get_str(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    return has(section, key) ? get_str(section, key) : fallback;
}

std::int64_t RunConfig::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get_str(section, key);
    try {
        std::size_t used = 0;
        const std::int64_t out = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config value " + section + "." + key + " is not an integer: '" +
                          v + "'");
    }
}

std::int64_t RunConfig::get_int(const std::string& section, const std::string& key,
                                std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t RunConfig::get_u64(const std::string& section, const std::string& key,
                                 std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::int64_t v = get_int(section, key);
    if (v < 0) throw ConfigError("config value " + section + "." + key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
}

double RunConfig::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get_str(section, key);
    try {
        std::size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config value " + section + "." + key + " is not a number: '" +
                          v + "'");
    }
}

double RunConfig::get_double(const std::string& section, const std::string& key,
                             double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

bool RunConfig::get_bool(const std::string& section, const std::string& key,
                         bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config value " + section + "." + key + " is not a boolean: '" + v +
                      "'");
}

std::string RunConfig::to_string() const {
    std::ostringstream out;
    bool first = true;
    for (const auto& [section, kv] : sections_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << section << "]\n";
        for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
    }
    return out.str();
}

}  // namespace smattn
