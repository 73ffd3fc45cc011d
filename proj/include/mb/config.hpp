#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mb/evolution.hpp"

namespace mb {

/// Everything an experiment can set, read from a flat `key=value` file
/// (one per line, `#` starts a comment) plus command-line overrides.
struct RunConfig {
    EvolutionConfig evolution;
    std::size_t snapshot_every = 100;
    /// True once any source assigned `seed`.
    bool seed_given = false;
};

/// Unknown key or unparseable value; `key()` names the offender.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what);
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

const std::vector<std::string>& config_keys();

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);
/// Parses `key=value`; throws ConfigError when there is no '='.
void apply_override(RunConfig& cfg, std::string_view assignment);

void read_config(RunConfig& cfg, std::istream& in);
void read_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Every key with its current value, in config_keys() order. Reading the
/// result back reproduces the configuration.
std::string format_config(const RunConfig& cfg);

} // namespace mb
