#pragma once

// CSV and JSON output. Numbers are written in the shortest form that reads
// back to the same double, so reruns produce identical bytes.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace icesheet {

/// Shortest round-trip decimal form; -0 is written as 0, non-finite values
/// as nan / inf / -inf.
std::string format_number(double v);

/// RFC-4180-style writer: header row first, fields quoted only when they
/// contain a comma, quote or line break.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    CsvWriter& add(double v);
    CsvWriter& add(std::string_view s);
    void end_row();
    /// Flushes and throws std::runtime_error if anything failed.
    void close();

private:
    void separator();

    std::filesystem::path path_;
    std::ofstream out_;
    std::size_t columns_;
    std::size_t field_ = 0;
};

/// Pretty-printed with sorted keys and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

}  // namespace icesheet
