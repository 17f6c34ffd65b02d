#include "distill/embedding_file.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "distill/errors.hpp"

namespace distill {

namespace {

__extension__ typedef unsigned __int128 u128;


constexpr std::size_t kHeaderBytes = 20;
constexpr std::size_t kCrcBytes = 4;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  return v;
}

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t len = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set) {
  set.validate();
  if (set.size() > UINT32_MAX) throw DataError("embedding set too large for the file format");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 4 * set.size() + 4 * set.data.size() + kCrcBytes);
  out.insert(out.end(), std::begin(kEmbeddingMagic), std::end(kEmbeddingMagic));
  put_u32(out, kEmbeddingVersion);
  put_u32(out, static_cast<std::uint32_t>(set.size()));
  put_u32(out, set.dim);
  put_u32(out, set.num_classes);
  for (ClassId label : set.labels) put_u32(out, label);
  for (float v : set.data) put_u32(out, std::bit_cast<std::uint32_t>(v));
  put_u32(out, crc32_ieee(out));
  return out;
}

EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes) {
  const std::uint64_t size = bytes.size();
  if (size < 4) throw FormatError(FormatErrorKind::kTruncated, size, "file shorter than the magic");
  if (std::memcmp(bytes.data(), kEmbeddingMagic, 4) != 0) {
    throw FormatError(FormatErrorKind::kBadMagic, 0, "expected \"EMB1\"");
  }
  if (size < 8) throw FormatError(FormatErrorKind::kTruncated, size, "file ends inside the header");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kEmbeddingVersion) {
    throw FormatError(FormatErrorKind::kBadVersion, 4, "unsupported version " + std::to_string(version));
  }
  if (size < kHeaderBytes + kCrcBytes) {
    throw FormatError(FormatErrorKind::kTruncated, size, "file ends inside the header");
  }
  const std::uint64_t n = get_u32(bytes, 8);
  const std::uint64_t d = get_u32(bytes, 12);
  const std::uint32_t c = get_u32(bytes, 16);
  const u128 expected =
      static_cast<u128>(kHeaderBytes + kCrcBytes) + 4 * static_cast<u128>(n) +
      4 * static_cast<u128>(n) * d;
  if (size < expected) {
    throw FormatError(FormatErrorKind::kTruncated, size,
                      "header declares N=" + std::to_string(n) + ", D=" + std::to_string(d) +
                          " which needs more bytes than present");
  }
  if (size > expected) {
    throw FormatError(FormatErrorKind::kTrailingBytes, static_cast<std::uint64_t>(expected),
                      "unexpected bytes after the checksum");
  }
  const std::uint32_t stored = get_u32(bytes, size - kCrcBytes);
  const std::uint32_t actual = crc32_ieee(bytes.first(size - kCrcBytes));
  if (stored != actual) {
    throw FormatError(FormatErrorKind::kCrcMismatch, size - kCrcBytes, "checksum does not match");
  }

  EmbeddingSet set;
  set.dim = static_cast<std::uint32_t>(d);
  set.num_classes = c;
  set.labels.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t off = kHeaderBytes + 4 * i;
    const std::uint32_t label = get_u32(bytes, off);
    if (label >= c) {
      throw FormatError(FormatErrorKind::kLabelOutOfRange, off,
                        "label " + std::to_string(label) + " is not below C = " + std::to_string(c));
    }
    set.labels[i] = label;
  }
  const std::size_t data_off = kHeaderBytes + 4 * n;
  set.data.resize(n * d);
  for (std::size_t i = 0; i < set.data.size(); ++i) {
    const std::size_t off = data_off + 4 * i;
    const float v = std::bit_cast<float>(get_u32(bytes, off));
    if (!std::isfinite(v)) throw FormatError(FormatErrorKind::kNonFiniteValue, off, "non-finite feature");
    set.data[i] = v;
  }
  return set;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("error while reading '" + path.string() + "'");
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("error while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw DataError("cannot move output into place at '" + path.string() + "'");
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(
                              reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path) {
  write_file_atomic(path, encode_embeddings(set));
}

EmbeddingSet read_embeddings(const std::filesystem::path& path) {
  return decode_embeddings(read_file_bytes(path));
}

}  // namespace distill
