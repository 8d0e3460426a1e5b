// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// CSV artifacts: '#'-prefixed metadata block, one header line, then rows.
// Floats are printed with 17 significant digits so that equal doubles always
// produce byte-identical files.

namespace opsize {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    }

    void metadata(const std::string& key, const std::string& value) {
        out_ << "# " << key << " = " << value << "\n";
    }
    void metadata(const std::string& key, double value) { metadata(key, format_double(value)); }
    void metadata(const std::string& key, long value) { metadata(key, std::to_string(value)); }

    void header(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? "," : "") << format_double(values[i]);
        out_ << "\n";
    }

    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    void close() { out_.close(); }

private:
    std::ofstream out_;
};

}  // namespace opsize
