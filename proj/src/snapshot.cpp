#include "fnls/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace fnls {

namespace {

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const SpectralField& field) {
  const Grid& g = field.grid();
  std::vector<unsigned char> out;
  out.reserve(kSnapshotHeaderBytes + 16 * field.size());
  for (char c : {'F', 'N', 'L', 'S'}) out.push_back(static_cast<unsigned char>(c));
  put_u32(out, kSnapshotVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim()));
  put_u32(out, static_cast<std::uint32_t>(g.points()));
  put_f64(out, g.length());
  put_u32(out, field.is_physical() ? 0u : 1u);
  put_u32(out, 0u);
  for (const auto& v : field.values()) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
  return out;
}

SpectralField decode_snapshot(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kSnapshotHeaderBytes)
    throw std::runtime_error("snapshot shorter than its header");
  if (std::memcmp(bytes.data(), "FNLS", 4) != 0)
    throw std::runtime_error("snapshot magic mismatch");
  const unsigned char* p = bytes.data();
  if (get_u32(p + 4) != kSnapshotVersion)
    throw std::runtime_error("unsupported snapshot version");
  const Grid grid = make_grid(static_cast<int>(get_u32(p + 8)),
                              static_cast<int>(get_u32(p + 12)), get_f64(p + 16));
  const std::uint32_t tag = get_u32(p + 24);
  if (tag > 1) throw std::runtime_error("invalid snapshot space tag");
  if (bytes.size() != kSnapshotHeaderBytes + 16 * grid.size())
    throw std::runtime_error("snapshot payload size mismatch");
  SpectralField field(grid, tag == 0 ? Space::physical : Space::frequency);
  const unsigned char* q = p + kSnapshotHeaderBytes;
  for (std::size_t i = 0; i < grid.size(); ++i, q += 16)
    field[i] = Complex(get_f64(q), get_f64(q + 8));
  return field;
}

void write_snapshot(const std::filesystem::path& path, const SpectralField& field) {
  const auto bytes = encode_snapshot(field);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

SpectralField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace fnls
