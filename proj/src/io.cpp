#include "icesheet/io.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace icesheet {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : path_(path), out_(path, std::ios::binary), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (const auto& h : header) add(std::string_view(h));
    end_row();
}

void CsvWriter::separator() {
    if (field_ > 0) out_ << ',';
    ++field_;
}

CsvWriter& CsvWriter::add(double v) {
    separator();
    out_ << format_number(v);
    return *this;
}

CsvWriter& CsvWriter::add(std::string_view s) {
    separator();
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
        out_ << s;
        return *this;
    }
    out_ << '"';
    for (char c : s) {
        if (c == '"') out_ << '"';
        out_ << c;
    }
    out_ << '"';
    return *this;
}

void CsvWriter::end_row() {
    if (field_ != columns_) {
        throw std::logic_error(path_.string() + ": row has " + std::to_string(field_) + " fields, header has " +
                               std::to_string(columns_));
    }
    out_ << '\n';
    field_ = 0;
}

void CsvWriter::close() {
    out_.flush();
    if (!out_) throw std::runtime_error("failed writing " + path_.string());
    out_.close();
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << value.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace icesheet
