#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "entropylab/errors.hpp"

namespace entropylab {

// deterministic number formatting for byte-identical reruns
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path) {
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
        out_ << "# schema=1\n" << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failure on " + path_.string());
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

inline void write_failed_marker(const std::filesystem::path& dir, const std::string& message) {
    std::ofstream out(dir / "run.failed", std::ios::binary | std::ios::trunc);
    out << message << "\n";
}

} // namespace entropylab
