#include "fakespot/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "fakespot/metrics.hpp"

namespace fakespot::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_unsigned(const std::string& key, const std::string& v, const std::string& origin)
{
    T out{};
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
        throw ConfigError(origin + ": " + key + " expects a non-negative integer, got '" + v + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v, const std::string& origin)
{
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
        throw ConfigError(origin + ": " + key + " expects a number, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v, const std::string& origin)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin + ": " + key + " expects true or false, got '" + v + "'");
}

}  // namespace

ConfigValues parse_config_text(const std::string& text, const std::string& origin)
{
    ConfigValues values;
    std::istringstream in(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(n) + ": expected key=value");
        const auto key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(n) + ": empty key");
        if (!values.emplace(key, trim(t.substr(eq + 1))).second) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
        }
    }
    return values;
}

ConfigValues read_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

void apply_config(RunConfig& c, const ConfigValues& values, const std::string& origin)
{
    for (const auto& [key, v] : values) {
        if (key == "data_root") c.data_root = v;
        else if (key == "seed") c.seed = parse_unsigned<std::uint64_t>(key, v, origin);
        else if (key == "batch_size") c.batch_size = parse_unsigned<std::size_t>(key, v, origin);
        else if (key == "epochs") c.epochs = parse_unsigned<std::size_t>(key, v, origin);
        else if (key == "learning_rate") c.learning_rate = parse_double(key, v, origin);
        else if (key == "topology") c.topology = v;
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "max_train_per_class") c.max_train_per_class = parse_unsigned<std::size_t>(key, v, origin);
        else if (key == "max_test_per_class") c.max_test_per_class = parse_unsigned<std::size_t>(key, v, origin);
        else if (key == "resume") c.resume = parse_bool(key, v, origin);
        else throw ConfigError(origin + ": unknown key '" + key + "'");
    }
    if (c.batch_size == 0) throw ConfigError(origin + ": batch_size must be at least 1");
    if (!(c.learning_rate > 0.0)) throw ConfigError(origin + ": learning_rate must be positive");
}

RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const ConfigValues& overrides)
{
    RunConfig c;
    if (file) apply_config(c, read_config_file(*file), file->string());
    apply_config(c, overrides, "command line");
    return c;
}

std::string render_config(const RunConfig& c)
{
    std::string s;
    auto line = [&](const char* k, const std::string& v) { s += std::string(k) + "=" + v + "\n"; };
    line("data_root", c.data_root.generic_string());
    line("seed", std::to_string(c.seed));
    line("batch_size", std::to_string(c.batch_size));
    line("epochs", std::to_string(c.epochs));
    line("learning_rate", metrics::format_number(c.learning_rate));
    line("topology", c.topology);
    line("output_dir", c.output_dir.generic_string());
    line("max_train_per_class", std::to_string(c.max_train_per_class));
    line("max_test_per_class", std::to_string(c.max_test_per_class));
    line("resume", c.resume ? "true" : "false");
    return s;
}

}  // namespace fakespot::cli
