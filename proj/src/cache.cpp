// Copyright 2026 The billiard-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "billiard/cache.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "billiard/error.hpp"
#include "billiard/numfmt.hpp"

namespace billiard {

static_assert(std::endian::native == std::endian::little,
              "the cache stores raw little-endian doubles");

namespace {

// Cached values must survive the round trip bit for bit.
std::string exact17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr const char* kMagic = "billiard-eigencache";

std::uint32_t crc_of(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t len = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + pos), uInt(len));
    pos += len;
  }
  return std::uint32_t(crc);
}

// Cursor over the file contents.
struct Reader {
  const std::string& data;
  std::size_t pos = 0;
  std::string path;

  std::string line() {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) fail(ErrorKind::Format, path + ": truncated cache file");
    std::string out = data.substr(pos, nl - pos);
    pos = nl + 1;
    return out;
  }

  std::pair<std::string, std::string> key_value() {
    const std::string l = line();
    const auto eq = l.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, path + ": malformed header line '" + l + "'");
    return {l.substr(0, eq), l.substr(eq + 1)};
  }
};

std::map<std::string, std::string> fields_of(const std::string& line, const std::string& path) {
  std::map<std::string, std::string> out;
  std::istringstream is(line);
  std::string tok;
  is >> tok;
  if (tok != "pair") fail(ErrorKind::Format, path + ": expected a pair record, got '" + line + "'");
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Format, path + ": malformed pair field '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

const std::string& field(const std::map<std::string, std::string>& f, const std::string& key,
                         const std::string& path) {
  auto it = f.find(key);
  if (it == f.end()) fail(ErrorKind::Format, path + ": pair record lacks '" + key + "'");
  return it->second;
}

}  // namespace

std::vector<std::pair<double, double>> EigenCache::missing(double lo, double hi) const {
  auto covered = windows;
  std::sort(covered.begin(), covered.end());
  std::vector<std::pair<double, double>> out;
  double cur = lo;
  for (const auto& [a, b] : covered) {
    if (b <= cur) continue;
    if (a >= hi) break;
    if (a > cur) out.emplace_back(cur, std::min(a, hi));
    cur = std::max(cur, b);
    if (cur >= hi) break;
  }
  if (cur < hi) out.emplace_back(cur, hi);
  return out;
}

void EigenCache::merge(double lo, double hi, std::vector<EigenPair> solved) {
  for (auto& p : solved) {
    auto same = std::find_if(pairs.begin(), pairs.end(),
                             [&](const EigenPair& q) { return q.index == p.index; });
    if (same == pairs.end()) pairs.push_back(std::move(p));
  }
  std::sort(pairs.begin(), pairs.end(), [](const EigenPair& a, const EigenPair& b) {
    return a.index < b.index;
  });
  // Union of intervals.
  windows.emplace_back(lo, hi);
  std::sort(windows.begin(), windows.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& w : windows) {
    if (!merged.empty() && w.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, w.second);
    else
      merged.push_back(w);
  }
  windows = std::move(merged);
}

std::vector<const EigenPair*> EigenCache::in_window(double lo, double hi) const {
  std::vector<const EigenPair*> out;
  for (const auto& p : pairs)
    if (p.E >= lo && p.E < hi) out.push_back(&p);
  return out;
}

void write_cache(const std::string& path, const EigenCache& cache) {
  const long dofs = long(cache.ns - 1) * long(cache.nt - 1);
  std::string body;
  body += std::string(kMagic) + " " + std::to_string(EigenCache::kFormatVersion) + "\n";
  for (const auto& [k, v] : cache.profile) body += "profile." + k + "=" + v + "\n";
  body += "ns=" + std::to_string(cache.ns) + "\n";
  body += "nt=" + std::to_string(cache.nt) + "\n";
  body += "residual_tol=" + exact17(cache.residual_tol) + "\n";
  for (const auto& [lo, hi] : cache.windows) body += "window=" + exact17(lo) + "," + exact17(hi) + "\n";
  body += "pairs=" + std::to_string(cache.pairs.size()) + "\n";
  body += "dofs=" + std::to_string(dofs) + "\n";
  body += "end-header\n";
  for (const auto& p : cache.pairs) {
    require(p.U.size() == dofs, ErrorKind::Internal, "cached vector has the wrong length");
    body += "pair index=" + std::to_string(p.index) + " E=" + exact17(p.E) +
            " residual=" + exact17(p.residual) + " refine_shift=" + exact17(p.refine_shift) +
            " unresolved=" + (p.possibly_unresolved ? "1" : "0") + "\n";
    body.append(reinterpret_cast<const char*>(p.U.data()), std::size_t(dofs) * sizeof(double));
  }
  char crc[32];
  std::snprintf(crc, sizeof crc, "crc32=%08x\n", crc_of(body));
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::Io, "cannot write cache file " + tmp);
    os.write(body.data(), std::streamsize(body.size()));
    os << crc;
    if (!os) fail(ErrorKind::Io, "write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) fail(ErrorKind::Io, "cannot move " + tmp + " to " + path);
}

EigenCache read_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorKind::Io, "cache file " + path + " not found; run 'billiard spectrum' first");
  std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());

  const auto tail = data.rfind("crc32=");
  if (tail == std::string::npos) fail(ErrorKind::Format, path + ": missing checksum");
  const std::string stored = data.substr(tail + 6, 8);
  char expect[16];
  std::snprintf(expect, sizeof expect, "%08x", crc_of(data.substr(0, tail)));
  if (stored != expect)
    fail(ErrorKind::Format, path + ": checksum mismatch (stored " + stored + ", computed " + expect + ")");

  Reader rd{data, 0, path};
  const std::string magic = rd.line();
  std::istringstream ms(magic);
  std::string word;
  int version = -1;
  ms >> word >> version;
  if (word != kMagic) fail(ErrorKind::Format, path + ": not an eigenpair cache");
  if (version != EigenCache::kFormatVersion) {
    fail(ErrorKind::Format, path + ": cache format version " + std::to_string(version) +
                                " is not supported (expected " +
                                std::to_string(EigenCache::kFormatVersion) +
                                "); delete the file or point cache_path elsewhere and re-run "
                                "'billiard spectrum' to rebuild it");
  }

  EigenCache cache;
  long npairs = -1, dofs = -1;
  for (;;) {
    if (data.compare(rd.pos, 11, "end-header\n") == 0) {
      rd.pos += 11;
      break;
    }
    const auto [key, value] = rd.key_value();
    if (key.rfind("profile.", 0) == 0)
      cache.profile[key.substr(8)] = value;
    else if (key == "ns")
      cache.ns = int(parse_long(value, "ns"));
    else if (key == "nt")
      cache.nt = int(parse_long(value, "nt"));
    else if (key == "residual_tol")
      cache.residual_tol = parse_double(value, "residual_tol");
    else if (key == "window") {
      const auto comma = value.find(',');
      if (comma == std::string::npos) fail(ErrorKind::Format, path + ": malformed window '" + value + "'");
      cache.windows.emplace_back(parse_double(value.substr(0, comma), "window"),
                                 parse_double(value.substr(comma + 1), "window"));
    } else if (key == "pairs")
      npairs = parse_long(value, "pairs");
    else if (key == "dofs")
      dofs = parse_long(value, "dofs");
    else
      fail(ErrorKind::Format, path + ": unknown header key '" + key + "'");
  }
  if (npairs < 0 || dofs != long(cache.ns - 1) * long(cache.nt - 1))
    fail(ErrorKind::Format, path + ": inconsistent header");

  cache.pairs.reserve(std::size_t(npairs));
  for (long n = 0; n < npairs; ++n) {
    const auto f = fields_of(rd.line(), path);
    EigenPair p;
    p.index = parse_long(field(f, "index", path), "index");
    p.E = parse_double(field(f, "E", path), "E");
    p.residual = parse_double(field(f, "residual", path), "residual");
    p.refine_shift = parse_double(field(f, "refine_shift", path), "refine_shift");
    p.possibly_unresolved = field(f, "unresolved", path) == "1";
    const std::size_t bytes = std::size_t(dofs) * sizeof(double);
    if (rd.pos + bytes > tail) fail(ErrorKind::Format, path + ": truncated vector data");
    p.U.resize(dofs);
    std::memcpy(p.U.data(), data.data() + rd.pos, bytes);
    rd.pos += bytes;
    cache.pairs.push_back(std::move(p));
  }
  if (rd.pos != tail) fail(ErrorKind::Format, path + ": trailing bytes before checksum");
  return cache;
}

}  // namespace billiard
