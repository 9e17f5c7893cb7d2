#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tanhseed {

// FNV-1a over the bytes of a string; run directories are named by this
// hash of the canonical config plus seed.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Round-trip-exact decimal form, used for every numeric CSV field.
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::string_view header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        out_ << header << '\n';
        path_ = path;
    }

    // row("a", 1.5, 2) -> "a,1.5,2"
    template <typename... Ts>
    void row(const Ts&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ",") << format(fields), first = false), ...);
        out_ << '\n';
    }

    void close() {
        out_.close();
        if (!out_) throw std::runtime_error("write failed: " + path_);
    }

private:
    static std::string format(double v) { return fmt_g17(v); }
    static std::string format(const std::string& s) { return s; }
    static std::string format(const char* s) { return s; }
    template <typename T>
    static std::string format(const T& v) {
        return std::to_string(v);
    }

    std::ofstream out_;
    std::string path_;
};

}  // namespace tanhseed
