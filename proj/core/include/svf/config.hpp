// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace svf {

// Flat "key = value" settings. Blank lines and '#' comments are ignored.
class Config {
public:
    static Config load(const std::filesystem::path& path);

    // Parses one "key=value" assignment; later assignments win.
    void assign(const std::string& assignment);
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Typed lookups throw DataError naming the key when the value does not
    // parse completely.
    double get(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace svf
