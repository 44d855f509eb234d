#pragma once

// Plain CSV / JSON serialization and content digests.

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mfrac/error.hpp"
#include "mfrac/estimate.hpp"
#include "mfrac/sample_path.hpp"

namespace mfrac::io {

/// Shortest round-trip decimal form; "nan" for NaN.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

inline double parse_double(std::string_view s, std::size_t line) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s == "nan" || s == "NaN") return std::nan("");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError("malformed number '" + std::string(s) + "'", line);
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view row, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = row.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(row.substr(start));
            return out;
        }
        out.push_back(row.substr(start, pos - start));
        start = pos + 1;
    }
}

inline std::string_view strip_cr(std::string_view s) {
    if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
    return s;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open '" + p.string() + "' for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + p.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for '" + p.string() + "'");
}

/// Pretty JSON with a trailing newline.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Sample paths

inline std::string path_to_csv(const SamplePath& path) {
    std::string s = "t,value\n";
    for (int u = 0; u <= path.grid_n(); ++u) {
        s += format_double(path.time(u));
        s += ',';
        s += format_double(path[static_cast<std::size_t>(u)]);
        s += '\n';
    }
    return s;
}

/// Reads a `t,value` CSV. Times must be strictly increasing; the path is
/// placed on the uniform grid u / N in row order.
inline SamplePath path_from_csv(std::string_view text, Json meta = Json::object()) {
    std::vector<double> values;
    std::size_t line = 0;
    double prev_t = -std::numeric_limits<double>::infinity();
    std::istringstream in{std::string(text)};
    std::string row;
    while (std::getline(in, row)) {
        ++line;
        const auto r = strip_cr(row);
        if (line == 1) {
            if (r != "t,value") throw ParseError("expected header 't,value'", line);
            continue;
        }
        if (r.empty()) continue;
        const auto f = split_fields(r);
        if (f.size() != 2) throw ParseError("expected 2 fields", line);
        const double t = parse_double(f[0], line);
        const double v = parse_double(f[1], line);
        if (!(t > prev_t)) throw ParseError("times must be strictly increasing", line);
        if (!std::isfinite(v)) throw ParseError("non-finite value", line);
        prev_t = t;
        values.push_back(v);
    }
    if (line == 0) throw ParseError("empty input", 1);
    if (values.size() < 2) throw ParseError("need at least 2 observations", line);
    return SamplePath(std::move(values), std::move(meta));
}

inline SamplePath read_path_csv(const std::filesystem::path& p) {
    Json meta = {{"source", p.filename().string()}};
    return path_from_csv(read_file(p), std::move(meta));
}

// ---------------------------------------------------------------------------
// Estimates

inline std::string estimate_to_csv(const EstimateSeries& e) {
    std::string s = "t,h_hat,n_points,flags\n";
    for (std::size_t i = 0; i < e.size(); ++i) {
        s += format_double(e.t_grid[i]);
        s += ',';
        s += format_double(e.h_hat[i]);
        s += ',';
        s += std::to_string(e.n_points_used[i]);
        s += ',';
        s += flags_to_string(e.flags[i]);
        s += '\n';
    }
    return s;
}

inline Json estimate_to_json(const EstimateSeries& e) {
    Json h = Json::array();
    for (double v : e.h_hat) h.push_back(std::isnan(v) ? Json(nullptr) : Json(v));
    Json flags = Json::array();
    for (auto f : e.flags) flags.push_back(flags_to_string(f));
    return {{"config", e.config.to_json()},
            {"t_grid", e.t_grid},
            {"h_hat", h},
            {"n_points_used", e.n_points_used},
            {"flags", flags},
            {"warnings", e.warnings}};
}

// ---------------------------------------------------------------------------
// Digests

inline std::string sha256_hex(std::string_view data) {
    struct CtxFree {
        void operator()(EVP_MD_CTX* c) const noexcept { EVP_MD_CTX_free(c); }
    };
    std::unique_ptr<EVP_MD_CTX, CtxFree> ctx(EVP_MD_CTX_new());
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1)
        throw Error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

/// Collects written artifacts and emits manifest.json listing each with its
/// SHA-256. Paths are stored relative to the output directory.
class Manifest {
public:
    explicit Manifest(std::filesystem::path root) : root_(std::move(root)) {}

    void write(const std::string& relative, std::string_view content) {
        write_file(root_ / relative, content);
        entries_.push_back({relative, sha256_hex(content), content.size()});
    }

    Json to_json(const Json& extra = Json::object()) const {
        Json files = Json::array();
        for (const auto& e : entries_)
            files.push_back({{"path", e.path}, {"sha256", e.digest}, {"bytes", e.bytes}});
        Json j = extra;
        j["files"] = files;
        return j;
    }

    void finish(const Json& extra = Json::object()) const {
        write_file(root_ / "manifest.json", dump_json(to_json(extra)));
    }

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    struct Entry {
        std::string path;
        std::string digest;
        std::size_t bytes;
    };
    std::filesystem::path root_;
    std::vector<Entry> entries_;
};

// ---------------------------------------------------------------------------
// CSV schema check: {"columns": [{"name": ..., "type": "string|number|integer"}]}

/// Returns an empty string when `csv` conforms, else a description of the
/// first violation.
inline std::string check_csv_schema(std::string_view csv, const Json& schema) {
    const auto& cols = schema.at("columns");
    std::istringstream in{std::string(csv)};
    std::string row;
    std::size_t line = 0;
    while (std::getline(in, row)) {
        ++line;
        const auto f = split_fields(strip_cr(row));
        if (f.size() != cols.size())
            return "line " + std::to_string(line) + ": expected " + std::to_string(cols.size()) + " fields";
        for (std::size_t c = 0; c < f.size(); ++c) {
            const std::string name = cols[c].at("name");
            if (line == 1) {
                if (f[c] != name) return "header column " + std::to_string(c + 1) + " should be '" + name + "'";
                continue;
            }
            const std::string type = cols[c].at("type");
            const bool nullable = cols[c].value("nullable", false);
            if (nullable && (f[c].empty() || f[c] == "nan")) continue;
            if (type == "number" || type == "integer") {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(f[c].data(), f[c].data() + f[c].size(), v);
                if (ec != std::errc{} || ptr != f[c].data() + f[c].size() || !std::isfinite(v))
                    return "line " + std::to_string(line) + ": '" + name + "' is not a number";
                if (type == "integer" && v != std::floor(v))
                    return "line " + std::to_string(line) + ": '" + name + "' is not an integer";
            } else if (cols[c].contains("enum")) {
                bool ok = false;
                for (const auto& e : cols[c]["enum"]) ok = ok || e.get<std::string>() == f[c];
                if (!ok) return "line " + std::to_string(line) + ": '" + name + "' has unexpected value";
            } else if (f[c].empty()) {
                return "line " + std::to_string(line) + ": '" + name + "' is empty";
            }
        }
    }
    if (line < 2) return "no data rows";
    return {};
}

} // namespace mfrac::io
