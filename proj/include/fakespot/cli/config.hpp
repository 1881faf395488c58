#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace fakespot::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kDefaultTopology = "in=3x32x32;conv=32@3x3,32@3x3;pool=max2;dense=64";

struct RunConfig {
    std::filesystem::path data_root;  // holds train/ and test/ class trees
    std::uint64_t seed = 1;
    std::size_t batch_size = 32;
    std::size_t epochs = 10;
    double learning_rate = 1e-3;
    std::string topology = kDefaultTopology;
    std::filesystem::path output_dir = "out";
    std::size_t max_train_per_class = 0;  // 0 keeps every image
    std::size_t max_test_per_class = 0;
    bool resume = false;
};

using ConfigValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Blank lines and lines starting with '#' are
/// skipped; surrounding whitespace is trimmed. Duplicate keys are an error.
ConfigValues parse_config_text(const std::string& text, const std::string& origin = "config");
ConfigValues read_config_file(const std::filesystem::path& path);

/// Applies values onto `config`. Unknown keys and malformed values throw ConfigError.
void apply_config(RunConfig& config, const ConfigValues& values, const std::string& origin = "config");

/// defaults < file < overrides.
RunConfig resolve_config(const std::optional<std::filesystem::path>& file, const ConfigValues& overrides);

/// Every key in a fixed order, one `key=value` line each.
std::string render_config(const RunConfig& config);

}  // namespace fakespot::cli
