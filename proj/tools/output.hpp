#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace shapefilt::cli {

/// RFC 4180 writer: CRLF records, fields quoted when they need it.
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(const std::vector<std::string>& fields);
    void close();

private:
    std::FILE* fp_ = nullptr;
    std::filesystem::path path_;
};

std::string fmt(double v);
std::string fmt(long long v);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

/// Run record written as manifest.json next to the outputs.
class Manifest {
public:
    Manifest(std::string command, std::filesystem::path out_dir);

    void set_config(nlohmann::json config) { doc_["config"] = std::move(config); }
    void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }
    void add_input(const std::filesystem::path& path);
    /// Path relative to the output directory.
    std::filesystem::path output(const std::string& name);
    void timing(const std::string& stage, double seconds) { doc_["timings"][stage] = seconds; }
    nlohmann::json& results() { return doc_["results"]; }
    void write();

private:
    std::filesystem::path out_;
    nlohmann::json doc_;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

} // namespace shapefilt::cli
