#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace lodll {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(const double* data, std::size_t count, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Binary container for one dense matrix.
///
///   "LODLLBIN" | u32 version | u64 key hash | u32 key length | key bytes |
///   u64 rows | u64 cols | rows*cols f64 (column-major) | u64 payload checksum
///
/// All integers little-endian, as written by the host.
void write_matrix_file(const std::filesystem::path& path, const std::string& key,
                       const Eigen::MatrixXd& m);

/// std::nullopt if the file is missing or stores a different key; throws an
/// io Error if the file is truncated or its checksum does not match.
std::optional<Eigen::MatrixXd> read_matrix_file(const std::filesystem::path& path,
                                                const std::string& key);

/// Hex rendering of fnv1a(key), used as a cache file stem.
std::string cache_stem(const std::string& key);

}  // namespace lodll
