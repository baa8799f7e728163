#include "nullgeo/report.hpp"

#include <sstream>

#include "nullgeo/util.hpp"

namespace nullgeo {

Report::Report(const std::string& command) { add("command", command); }

void Report::add(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}
void Report::add(const std::string& key, const char* value) {
    entries_.emplace_back(key, std::string(value));
}
void Report::add(const std::string& key, double value) {
    entries_.emplace_back(key, format_double(value));
}
void Report::add(const std::string& key, int value) {
    entries_.emplace_back(key, std::to_string(value));
}
void Report::add(const std::string& key, bool value) {
    entries_.emplace_back(key, value ? "true" : "false");
}

bool Report::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& Report::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw PreconditionError("report has no entry '" + key + "'");
}

double Report::get_double(const std::string& key) const { return std::stod(get(key)); }

std::string Report::to_text() const {
    std::ostringstream out;
    out << "nullgeo-report v1\n";
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    return out.str();
}

Report Report::parse(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "nullgeo-report v1")
        throw ParseError("report must start with 'nullgeo-report v1'", 1);
    Report r;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        auto pos = line.find(" = ");
        if (pos == std::string::npos)
            throw ParseError("report line " + std::to_string(number) + ": expected 'key = value'",
                             number);
        r.entries_.emplace_back(line.substr(0, pos), line.substr(pos + 3));
    }
    return r;
}

}  // namespace nullgeo
