#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcrb {

/// Rectangular table of real-valued results plus a metadata block that lands
/// in '#'-prefixed header lines. +infinity is a legal cell value (printed as
/// "inf"); NaN is rejected on append.
class ResultTable {
public:
    explicit ResultTable(std::vector<std::string> columns) : columns_(std::move(columns)) {
        if (columns_.empty()) throw std::invalid_argument("ResultTable: need columns");
    }

    void add_metadata(const std::string& key, const std::string& value) {
        metadata_.emplace_back(key, value);
    }

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("ResultTable: row width mismatch");
        for (double v : row)
            if (std::isnan(v)) throw std::invalid_argument("ResultTable: NaN cell rejected");
        rows_.push_back(row);
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    const std::vector<std::pair<std::string, std::string>>& metadata() const { return metadata_; }

    static std::string format_cell(double v) {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return buf;
    }

    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : metadata_) os << "# " << k << "=" << v << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i)
            os << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
        for (const auto& row : rows_) {
            for (std::size_t i = 0; i < row.size(); ++i)
                os << format_cell(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::pair<std::string, std::string>> metadata_;
};

}  // namespace pcrb
