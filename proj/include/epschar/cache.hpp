#pragma once
// On-disk cache of class-function tables.
//
// File layout, all integers little-endian:
//   "EPSC"  u32 version  u32 n  u32 p  u32 r
//   u32 name length, name bytes, u8 full_domain
//   u64 count, count x u64 ElementIndex
//   u32 degree, count x degree x i64 coefficients
//   32 bytes: SHA-256 of everything above

#include <openssl/evp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>

#include "epschar/charfun.hpp"
#include "epschar/config.hpp"

namespace epschar {

inline constexpr uint32_t kCacheVersion = 1;

namespace detail {

inline void put_u32(std::string& b, uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}
inline void put_u64(std::string& b, uint64_t v) {
  for (int k = 0; k < 8; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::string& b) : b_(b) {}
  uint64_t get(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > b_.size()) throw DomainError("cache file truncated");
    uint64_t v = 0;
    for (int k = 0; k < bytes; ++k) v |= uint64_t{static_cast<unsigned char>(b_[pos_++])} << (8 * k);
    return v;
  }
  std::string bytes(std::size_t len) {
    if (pos_ + len > b_.size()) throw DomainError("cache file truncated");
    std::string s = b_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  std::size_t pos() const noexcept { return pos_; }

 private:
  const std::string& b_;
  std::size_t pos_ = 0;
};

inline std::string sha256_raw(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  return std::string(reinterpret_cast<const char*>(md), len);
}

}  // namespace detail

inline std::string encode_table(const ClassFunction& t, int n, int p, int r, uint32_t version = kCacheVersion) {
  std::string b = "EPSC";
  detail::put_u32(b, version);
  detail::put_u32(b, static_cast<uint32_t>(n));
  detail::put_u32(b, static_cast<uint32_t>(p));
  detail::put_u32(b, static_cast<uint32_t>(r));
  detail::put_u32(b, static_cast<uint32_t>(t.name.size()));
  b += t.name;
  b.push_back(t.full_domain ? 1 : 0);
  detail::put_u64(b, t.index.size());
  for (ElementIndex i : t.index) detail::put_u64(b, static_cast<uint64_t>(i));
  const std::size_t degree = t.value.empty() ? 0 : t.value.front().coeffs().size();
  detail::put_u32(b, static_cast<uint32_t>(degree));
  for (const CycValue& v : t.value) {
    if (v.coeffs().size() != degree) throw DomainError("encode_table: mixed cyclotomic contexts");
    for (int64_t c : v.coeffs()) detail::put_u64(b, static_cast<uint64_t>(c));
  }
  return b + detail::sha256_raw(b);
}

enum class CacheStatus { Hit, Missing, Corrupt, Stale };

inline std::string cache_status_name(CacheStatus s) {
  switch (s) {
    case CacheStatus::Hit: return "hit";
    case CacheStatus::Missing: return "missing";
    case CacheStatus::Corrupt: return "corrupt";
    case CacheStatus::Stale: return "stale";
  }
  return "?";
}

/// Decodes a table written by encode_table; nullopt with the reason when the
/// bytes are truncated, fail the checksum, or carry another version or shape.
inline std::optional<ClassFunction> decode_table(const std::string& b, const Scalars& S, int n, int r,
                                                 CacheStatus* status) {
  auto fail = [&](CacheStatus s) {
    if (status) *status = s;
    return std::nullopt;
  };
  if (b.size() < 36 || b.compare(0, 4, "EPSC") != 0) return fail(CacheStatus::Corrupt);
  const std::string body = b.substr(0, b.size() - 32);
  if (detail::sha256_raw(body) != b.substr(b.size() - 32)) return fail(CacheStatus::Corrupt);
  try {
    detail::Reader in(body);
    in.bytes(4);
    if (in.get(4) != kCacheVersion) return fail(CacheStatus::Stale);
    if (in.get(4) != static_cast<uint64_t>(n) || in.get(4) != static_cast<uint64_t>(S.p()) ||
        in.get(4) != static_cast<uint64_t>(r))
      return fail(CacheStatus::Stale);
    ClassFunction t;
    t.name = in.bytes(in.get(4));
    t.full_domain = in.get(1) != 0;
    const uint64_t count = in.get(8);
    if (count > body.size()) return fail(CacheStatus::Corrupt);
    for (uint64_t k = 0; k < count; ++k) t.index.push_back(static_cast<ElementIndex>(in.get(8)));
    const uint64_t degree = in.get(4);
    if (count > 0 && degree != static_cast<uint64_t>(S.cyc()->degree())) return fail(CacheStatus::Stale);
    for (uint64_t k = 0; k < count; ++k) {
      std::vector<int64_t> c;
      for (uint64_t d = 0; d < degree; ++d) c.push_back(static_cast<int64_t>(in.get(8)));
      t.value.emplace_back(S.cyc(), std::move(c));
    }
    if (in.pos() != body.size()) return fail(CacheStatus::Corrupt);
    if (status) *status = CacheStatus::Hit;
    return t;
  } catch (const DomainError&) {
    return fail(CacheStatus::Corrupt);
  }
}

/// Directory precedence: explicit --cache-dir, then EPSCHAR_CACHE, then
/// ".epschar-cache" in the working directory.
inline std::filesystem::path resolve_cache_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("EPSCHAR_CACHE"); env && *env) return env;
  return ".epschar-cache";
}

class Cache {
 public:
  explicit Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }

  std::filesystem::path path_for(const Config& c, const std::string& table) const {
    return dir_ / (sha256_hex(c.hash() + "/" + table) + ".epsc");
  }

  void store(const Config& c, const ClassFunction& t) const {
    std::filesystem::create_directories(dir_);
    const auto path = path_for(c, t.name);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write cache file " + tmp);
      const std::string b = encode_table(t, c.n, c.p, c.r);
      out.write(b.data(), static_cast<std::streamsize>(b.size()));
    }
    std::filesystem::rename(tmp, path);
  }

  std::optional<ClassFunction> load(const Config& c, const std::string& table, const Scalars& S,
                                    CacheStatus* status) const {
    const auto path = path_for(c, table);
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      if (status) *status = CacheStatus::Missing;
      return std::nullopt;
    }
    const std::string b((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_table(b, S, c.n, c.r, status);
  }

  /// Loads the table or computes and stores it. `warn` receives a message
  /// when an existing file had to be discarded.
  ClassFunction get_or_compute(const Config& c, const std::string& table, const Scalars& S,
                               const std::function<ClassFunction()>& compute, CacheStatus* status = nullptr,
                               const std::function<void(const std::string&)>& warn = {}) const {
    CacheStatus st = CacheStatus::Missing;
    if (auto t = load(c, table, S, &st)) {
      if (status) *status = st;
      return *t;
    }
    if ((st == CacheStatus::Corrupt || st == CacheStatus::Stale) && warn)
      warn("cache file " + path_for(c, table).string() + " is " + cache_status_name(st) + "; recomputing");
    if (status) *status = st;
    ClassFunction t = compute();
    t.name = table;
    store(c, t);
    return t;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace epschar
