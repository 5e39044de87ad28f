#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "dimer/runner.hpp"

namespace dimer {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(fs::path path, const std::vector<std::string>& header) : path_(std::move(path)) {
    for (const auto& h : header) cell(h);
    end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& v) {
    if (row_open_) text_ += ',';
    text_ += v;
    row_open_ = true;
    return *this;
}

void CsvWriter::end_row() {
    text_ += '\n';
    row_open_ = false;
}

fs::path CsvWriter::close() {
    if (row_open_) end_row();
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::binary | std::ios::trunc);
    out << text_;
    if (!out) throw std::runtime_error("cannot write " + path_.string());
    return path_;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("sha256: cannot open " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256: digest init failed");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

fs::path Manifest::write(const fs::path& dir) const {
    json artifacts_json = json::array();
    for (const auto& a : artifacts) {
        artifacts_json.push_back({{"path", fs::relative(a, dir).generic_string()}, {"sha256", sha256_file(a)}});
    }
    json failures_json = json::array();
    for (const auto& f : failures) failures_json.push_back({{"index", f.index}, {"message", f.message}});
    const json doc = {
        {"command", command},
        {"config", config},
        {"wall_seconds", wall_seconds},
        {"artifacts", artifacts_json},
        {"cache", {{"hits", cache_hits}, {"misses", cache_misses}}},
        {"failures", failures_json},
        {"notes", notes},
        {"summary", summary},
    };
    fs::create_directories(dir);
    const fs::path path = dir / "manifest.json";
    std::ofstream out(path, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return path;
}

fs::path FloquetCache::path_for(const ModelParams& params, const StepControl& step) const {
    char name[40];
    std::snprintf(name, sizeof name, "flqm_%016llx.bin",
                  static_cast<unsigned long long>(params_fingerprint(params, step)));
    return dir_ / name;
}

void FloquetCache::record(bool hit, std::string note) {
    std::lock_guard<std::mutex> lock(mutex_);
    ++(hit ? hits_ : misses_);
    if (!note.empty()) notes_.push_back(std::move(note));
}

FloquetMap FloquetCache::get(const PropagationContext& ctx, int threads) {
    if (dir_.empty()) {
        record(false);
        return build_floquet_map(ctx, threads);
    }
    const fs::path path = path_for(ctx.params, ctx.step);
    std::string note;
    if (fs::exists(path)) {
        try {
            FloquetMap map = load_floquet_map(path, ctx.params, ctx.step);
            record(true);
            return map;
        } catch (const CacheMismatchError& e) {
            note = "cache fingerprint mismatch, rebuilding " + path.filename().string() + ": " + e.what();
        } catch (const std::runtime_error& e) {
            note = "unreadable cache entry, rebuilding " + path.filename().string() + ": " + e.what();
        }
    }
    record(false, std::move(note));
    FloquetMap map = build_floquet_map(ctx, threads);
    fs::create_directories(dir_);
    save_floquet_map(path, map);
    return map;
}

}  // namespace dimer
