#include "lodll/cache.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "lodll/error.hpp"

namespace lodll {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'O', 'D', 'L', 'L', 'B', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(is);
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a(const double* data, std::size_t count, std::uint64_t seed) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(data), count * sizeof(double)), seed);
}

std::string cache_stem(const std::string& key) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(key);
  return os.str();
}

void write_matrix_file(const std::filesystem::path& path, const std::string& key,
                       const Eigen::MatrixXd& m) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) fail(ErrorKind::io, "cannot open " + tmp + " for writing");
    os.write(kMagic.data(), kMagic.size());
    put(os, kVersion);
    put(os, fnv1a(key));
    put(os, static_cast<std::uint32_t>(key.size()));
    os.write(key.data(), static_cast<std::streamsize>(key.size()));
    put(os, static_cast<std::uint64_t>(m.rows()));
    put(os, static_cast<std::uint64_t>(m.cols()));
    const auto n = static_cast<std::size_t>(m.size());
    os.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(n * sizeof(double)));
    put(os, fnv1a(m.data(), n));
    if (!os) fail(ErrorKind::io, "write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::optional<Eigen::MatrixXd> read_matrix_file(const std::filesystem::path& path,
                                                const std::string& key) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  const auto corrupt = [&](const char* what) {
    fail(ErrorKind::io, "cache file " + path.string() + " is corrupt: " + what);
  };
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) corrupt("bad magic");
  std::uint32_t version = 0;
  std::uint64_t key_hash = 0;
  std::uint32_t key_len = 0;
  if (!get(is, version) || version != kVersion) corrupt("unsupported version");
  if (!get(is, key_hash) || !get(is, key_len)) corrupt("truncated header");
  std::string stored(key_len, '\0');
  is.read(stored.data(), key_len);
  if (!is) corrupt("truncated key");
  if (key_hash != fnv1a(stored)) corrupt("key hash mismatch");
  if (stored != key) return std::nullopt;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  if (!get(is, rows) || !get(is, cols)) corrupt("truncated shape");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const auto n = static_cast<std::size_t>(rows * cols);
  is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) corrupt("truncated payload");
  std::uint64_t checksum = 0;
  if (!get(is, checksum)) corrupt("missing checksum");
  if (checksum != fnv1a(m.data(), n)) corrupt("checksum mismatch");
  return m;
}

}  // namespace lodll
