#pragma once

#include <string>
#include <utility>
#include <vector>

#include "nullgeo/errors.hpp"

namespace nullgeo {

// Line-oriented `key = value` report. Entries keep insertion order so the
// same run always produces byte-identical text; doubles are printed with 17
// significant digits and re-parse bit-exactly.
class Report {
public:
    Report() = default;
    explicit Report(const std::string& command);

    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, const char* value);
    void add(const std::string& key, double value);
    void add(const std::string& key, int value);
    void add(const std::string& key, bool value);

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;  // throws if missing
    double get_double(const std::string& key) const;

    std::string to_text() const;
    static Report parse(const std::string& text);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace nullgeo
