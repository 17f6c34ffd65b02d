#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "distill/dataset.hpp"

namespace distill {

// Binary embedding file, little-endian:
//
//   offset 0   "EMB1"
//          4   u32 version (= 1)
//          8   u32 N
//         12   u32 D
//         16   u32 C
//         20   N x u32 labels
//   20 + 4N    N x D x f32, row-major
//   end - 4    u32 CRC-32 (IEEE) of all preceding bytes
//
// Total length is exactly 24 + 4N + 4ND bytes.
inline constexpr char kEmbeddingMagic[4] = {'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;

std::uint32_t crc32_ieee(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_embeddings(const EmbeddingSet& set);
// Throws FormatError with the offending byte offset.
EmbeddingSet decode_embeddings(std::span<const std::uint8_t> bytes);

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet read_embeddings(const std::filesystem::path& path);

// Whole-file helpers. Writes go to a temporary sibling that is renamed over
// the destination.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace distill
