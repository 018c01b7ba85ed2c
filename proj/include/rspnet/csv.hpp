#pragma once

// deterministic CSV emission: shortest round-trip doubles, \n line endings,
// first line records tool version, config hash and master seed

#include <charconv>
#include <complex>
#include <cstdint>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "rspnet/errors.hpp"
#include "rspnet/version.hpp"

namespace rspnet {

namespace csvfmt {

inline std::string fmt(double v) {
    char buf[64];
    const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v);
    if (r.ec != std::errc()) throw IoError("double formatting failed");
    return std::string(buf, r.ptr);
}

inline std::string fmt(std::uint64_t v) {
    char buf[32];
    const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline std::string fmt(int v) { return fmt(std::uint64_t(v < 0 ? 0 : v)); }

inline std::string fmt(bool v) { return v ? "1" : "0"; }

inline std::string fmt(std::complex<double> v) {
    std::string s = fmt(v.real());
    const std::string im = fmt(v.imag());
    if (im[0] != '-') s += '+';
    s += im;
    s += 'i';
    return s;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), v, 16);
    std::string s(buf, r.ptr);
    return std::string(16 - s.size(), '0') + s;
}

}  // namespace csvfmt

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& tool, std::uint64_t config_hash,
              std::uint64_t master_seed)
        : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open " + path + " for writing");
        out_ << "# " << tool << ' ' << version << " config_hash=" << csvfmt::hex64(config_hash)
             << " master_seed=" << csvfmt::fmt(master_seed) << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) throw IoError("write failed");
    }

private:
    std::ofstream out_;
};

}
