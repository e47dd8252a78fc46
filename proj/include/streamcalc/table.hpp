#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

// Plot-ready output rows: fixed documented column sets, header always
// emitted, full-precision locale-independent numbers. Meta lines (run
// parameters, scenario echo) go into '#'-prefixed comment lines in CSV and
// a "meta" object in JSON.

namespace streamcalc {

using Cell = std::variant<double, std::int64_t, std::string, bool>;

// Shortest round-trip decimal form, '.' decimal point regardless of locale.
inline std::string format_number(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
    return std::string(buf, res.ptr);
}

class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_meta(const std::string& key, const std::string& value) {
        meta_.emplace_back(key, value);
    }
    void add_row(std::vector<Cell> row) {
        if (row.size() != columns_.size())
            throw std::invalid_argument("Table: row width does not match header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    void write_csv(std::ostream& os) const {
        for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << "\n";
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            os << (c ? "," : "") << columns_[c];
        }
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) os << ",";
                os << cell_to_string(row[c]);
            }
            os << "\n";
        }
    }

    void write_json(std::ostream& os) const {
        nlohmann::json doc;
        doc["meta"] = nlohmann::json::object();
        for (const auto& [k, v] : meta_) doc["meta"][k] = v;
        doc["columns"] = columns_;
        doc["rows"] = nlohmann::json::array();
        for (const auto& row : rows_) {
            nlohmann::json jr = nlohmann::json::array();
            for (const Cell& cell : row) {
                std::visit([&jr](const auto& v) { jr.push_back(v); }, cell);
            }
            doc["rows"].push_back(std::move(jr));
        }
        os << doc.dump(2) << "\n";
    }

    void write(std::ostream& os, const std::string& format) const {
        if (format == "csv") {
            write_csv(os);
        } else if (format == "json") {
            write_json(os);
        } else {
            throw std::invalid_argument("Table: unknown output format '" + format + "'");
        }
    }

private:
    // strings carrying separators are double-quoted per the usual CSV rules
    static std::string csv_escape(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        out += '"';
        return out;
    }

    static std::string cell_to_string(const Cell& cell) {
        if (std::holds_alternative<double>(cell)) return format_number(std::get<double>(cell));
        if (std::holds_alternative<std::int64_t>(cell))
            return std::to_string(std::get<std::int64_t>(cell));
        if (std::holds_alternative<bool>(cell)) return std::get<bool>(cell) ? "true" : "false";
        return csv_escape(std::get<std::string>(cell));
    }

    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::pair<std::string, std::string>> meta_;
};

}  // namespace streamcalc
