#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fnls/spectral_field.hpp"

namespace fnls {

// Binary field snapshot, all little-endian:
//   offset  0  char[4]  magic "FNLS"
//   offset  4  u32      format version
//   offset  8  u32      spatial dimension n
//   offset 12  u32      points per dimension N
//   offset 16  f64      box length L
//   offset 24  u32      space tag (0 physical, 1 frequency)
//   offset 28  u32      reserved, zero
//   offset 32  N^n pairs of f64 (re, im), row-major
inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 32;

std::vector<unsigned char> encode_snapshot(const SpectralField& field);
/// Throws std::runtime_error on bad magic, version, or truncated payload.
SpectralField decode_snapshot(const std::vector<unsigned char>& bytes);

void write_snapshot(const std::filesystem::path& path, const SpectralField& field);
SpectralField read_snapshot(const std::filesystem::path& path);

}  // namespace fnls
