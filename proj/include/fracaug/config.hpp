#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace fracaug {

// Flat `key = value` configuration, layered defaults < file < command line.
// Unknown keys are rejected; every resolved value is echoed into the run's
// config.snapshot so a run can be reproduced from it alone.
class FlatConfig {
public:
    FlatConfig();  // populated with the documented defaults

    void load_file(const std::filesystem::path& file);
    void set(const std::string& key, const std::string& value);  // rejects unknown keys

    const std::string& get(const std::string& key) const;
    long get_long(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_seed(const std::string& key) const;

    // All resolved pairs, one `key = value` per line, sorted by key.
    std::string snapshot() const;
    void write_snapshot(const std::filesystem::path& file) const;

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace fracaug
