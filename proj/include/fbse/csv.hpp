#pragma once
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace fbse {

// Shortest round-trip decimal form; NaN spelled "nan". Deterministic given the
// same doubles, so re-runs produce byte-identical files.
std::string format_double(double v);

// CSV with '#'-prefixed metadata lines followed by a one-line header.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns);
    void comment(const std::string& key, const std::string& value);
    void row(const std::vector<std::string>& cells);
    void close();
    const std::string& path() const { return path_; }

private:
    void flush_header();
    std::string path_;
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> comments_;
    std::vector<std::string> rows_;
    bool closed_ = false;
};

uint64_t fnv1a64_file(const std::string& path);

} // namespace fbse
