#include "output.hpp"

#include <fstream>

#include "shapefilt/error.hpp"

namespace shapefilt::cli {

CsvWriter::CsvWriter(const std::filesystem::path& path) : path_(path) {
    fp_ = std::fopen(path.string().c_str(), "wb");
    if (!fp_) throw IoError("cannot write " + path.string());
}

CsvWriter::~CsvWriter() {
    if (fp_) std::fclose(fp_);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) std::fputc(',', fp_);
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            std::fputs(f.c_str(), fp_);
            continue;
        }
        std::fputc('"', fp_);
        for (char c : f) {
            if (c == '"') std::fputc('"', fp_);
            std::fputc(c, fp_);
        }
        std::fputc('"', fp_);
    }
    std::fputs("\r\n", fp_);
}

void CsvWriter::close() {
    if (!fp_) return;
    const bool bad = std::ferror(fp_) != 0;
    const int rc = std::fclose(fp_);
    fp_ = nullptr;
    if (bad || rc != 0) throw IoError("failed writing " + path_.string());
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(long long v) { return std::to_string(v); }

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

Manifest::Manifest(std::string command, std::filesystem::path out_dir) : out_(std::move(out_dir)) {
    std::filesystem::create_directories(out_);
    doc_ = {{"command", std::move(command)},
            {"inputs", nlohmann::json::array()},
            {"outputs", nlohmann::json::array()},
            {"timings", nlohmann::json::object()},
            {"results", nlohmann::json::object()}};
}

void Manifest::add_input(const std::filesystem::path& path) {
    doc_["inputs"].push_back({{"path", path.string()}, {"fnv1a64", file_hash(path)}});
}

std::filesystem::path Manifest::output(const std::string& name) {
    doc_["outputs"].push_back(name);
    return out_ / name;
}

void Manifest::write() {
    std::ofstream out(out_ / "manifest.json", std::ios::binary);
    if (!out) throw IoError("cannot write manifest in " + out_.string());
    out << doc_.dump(2) << '\n';
}

} // namespace shapefilt::cli
