// Copyright 2026 The VCAE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vcae/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace vcae::pack {

static_assert(std::endian::native == std::endian::little,
              "container encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'V', 'C', 'A', 'E', 'P', 'A', 'K', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 34;

class Writer {
 public:
  template <typename T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void put_doubles(std::span<const double> d) { put_bytes(d.data(), d.size() * sizeof(double)); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::uint64_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void get_doubles(std::span<double> dst, const char* what) {
    need(dst.size() * sizeof(double), what);
    std::memcpy(dst.data(), in_.data() + pos_, dst.size() * sizeof(double));
    pos_ += dst.size() * sizeof(double);
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::uint64_t n, const char* what) {
    if (n > remaining()) {
      throw FormatError(FormatError::Kind::Truncated,
                        std::string("container truncated while reading ") + what + " at byte " +
                            std::to_string(pos_));
    }
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> encode(const Container& c) {
  Writer w;
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.kind));
  w.put<std::uint64_t>(c.metadata.size());
  w.put_bytes(c.metadata.data(), c.metadata.size());
  w.put<std::uint64_t>(c.entries.size());
  for (const auto& e : c.entries) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(e.name.size()));
    w.put_bytes(e.name.data(), e.name.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t d : e.value.shape()) w.put<std::uint64_t>(d);
    w.put<std::uint8_t>(e.adam ? 1 : 0);
    w.put_doubles(e.value.data());
    if (e.adam) {
      w.put<std::uint64_t>(e.adam->t);
      w.put<double>(e.adam->beta1);
      w.put<double>(e.adam->beta2);
      w.put<double>(e.adam->eps);
      w.put<double>(e.adam->lr);
      w.put_doubles(e.adam->m.data());
      w.put_doubles(e.adam->v.data());
    }
  }
  const std::uint32_t crc = checksum(w.bytes());
  w.put<std::uint32_t>(crc);
  return std::move(w.bytes());
}

Container decode(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(FormatError::Kind::BadMagic, "not a VCAE container (bad magic)");
  }
  r.get_string(sizeof(kMagic), "magic");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw FormatError(FormatError::Kind::VersionMismatch,
                      "container format version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kFormatVersion));
  }
  Container c;
  c.kind = static_cast<ContainerKind>(r.get<std::uint32_t>("kind"));
  const auto meta_len = r.get<std::uint64_t>("metadata length");
  c.metadata = r.get_string(meta_len, "metadata");
  const auto count = r.get<std::uint64_t>("entry count");
  if (count > r.remaining()) {
    throw FormatError(FormatError::Kind::Truncated, "entry count exceeds file size");
  }
  c.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Entry e;
    const auto name_len = r.get<std::uint32_t>("name length");
    e.name = r.get_string(name_len, "name");
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank > 8) {
      throw FormatError(FormatError::Kind::Malformed,
                        "entry '" + e.name + "' has implausible rank " + std::to_string(rank));
    }
    Tensor::Shape shape(rank);
    std::uint64_t n = 1;
    for (auto& d : shape) {
      d = r.get<std::uint64_t>("dimension");
      if (d != 0 && n > kMaxElements / d) {
        throw FormatError(FormatError::Kind::Malformed, "entry '" + e.name + "' is too large");
      }
      n *= d;
    }
    const auto flags = r.get<std::uint8_t>("flags");
    if (n * sizeof(double) > r.remaining()) {
      throw FormatError(FormatError::Kind::Truncated,
                        "container truncated inside payload of '" + e.name + "' at byte " +
                            std::to_string(r.pos()));
    }
    e.value = Tensor(shape);
    r.get_doubles(e.value.data(), "payload");
    if (flags & 1u) {
      AdamState a;
      a.t = r.get<std::uint64_t>("adam step");
      a.beta1 = r.get<double>("adam beta1");
      a.beta2 = r.get<double>("adam beta2");
      a.eps = r.get<double>("adam eps");
      a.lr = r.get<double>("adam lr");
      a.m = Tensor(shape);
      a.v = Tensor(shape);
      r.get_doubles(a.m.data(), "adam first moment");
      r.get_doubles(a.v.data(), "adam second moment");
      e.adam = std::move(a);
    }
    c.entries.push_back(std::move(e));
  }
  const std::size_t body_end = r.pos();
  const auto stored = r.get<std::uint32_t>("checksum");
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::Malformed, "trailing bytes after checksum");
  }
  if (checksum(bytes.first(body_end)) != stored) {
    throw FormatError(FormatError::Kind::ChecksumMismatch, "container checksum mismatch");
  }
  return c;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw FormatError(FormatError::Kind::Io, "failed reading " + path.string());
  return bytes;
}

void write_file(const Container& c, const std::filesystem::path& path) {
  const auto bytes = encode(c);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatError::Kind::Io, "cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatError::Kind::Io, "failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Container read_file(const std::filesystem::path& path) { return decode(read_bytes(path)); }

}  // namespace vcae::pack
