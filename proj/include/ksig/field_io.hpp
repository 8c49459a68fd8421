#pragma once

// KSIG field files.
//
// Layout (all integers and floats little-endian):
//   offset 0   4 bytes  magic "KSIG"
//   offset 4   u8       format version (1)
//   offset 5   u8       grid dimension n
//   offset 6   u8       components per node (1 for scalar fields,
//                       n(n+1)/2 for packed symmetric tensor fields)
//   offset 7   u8       reserved, 0
//   offset 8   u32      resolution N per axis
//   offset 12  f64[]    N^n * components values, row-major node order,
//                       components of one node contiguous
//
// CSV export writes `i1,...,in,value` with one row per node.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ksig/grid.hpp"
#include "ksig/symcone.hpp"

namespace ksig {

class FieldIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kFieldFormatVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 12;

struct FieldFile {
  int dim = 0;
  int resolution = 0;
  int components = 0;
  std::vector<double> data;
};

namespace detail {

inline void put_u32(std::string& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline void put_f64(std::string& buf, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

inline std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace detail

inline void write_field_file(const std::filesystem::path& path, const FieldFile& file) {
  std::string buf;
  buf.reserve(kFieldHeaderBytes + 8 * file.data.size());
  buf.append("KSIG", 4);
  buf.push_back(static_cast<char>(kFieldFormatVersion));
  buf.push_back(static_cast<char>(file.dim));
  buf.push_back(static_cast<char>(file.components));
  buf.push_back('\0');
  detail::put_u32(buf, static_cast<std::uint32_t>(file.resolution));
  for (double v : file.data) detail::put_f64(buf, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FieldIoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FieldIoError("write failed for " + path.string());
}

[[nodiscard]] inline FieldFile read_field_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FieldIoError("cannot open field file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < kFieldHeaderBytes || std::memcmp(bytes.data(), "KSIG", 4) != 0) {
    throw FieldIoError(path.string() + ": malformed header (missing KSIG magic)");
  }
  if (bytes[4] != kFieldFormatVersion) {
    throw FieldIoError(path.string() + ": unsupported format version " + std::to_string(bytes[4]));
  }
  FieldFile f;
  f.dim = bytes[5];
  f.components = bytes[6];
  f.resolution = static_cast<int>(detail::get_le(bytes.data() + 8, 4));
  if (f.dim < 1 || f.dim > kMaxDim || f.components < 1 || f.resolution < 1) {
    throw FieldIoError(path.string() + ": malformed header (dim " + std::to_string(f.dim) + ", N " +
                       std::to_string(f.resolution) + ", components " + std::to_string(f.components) + ")");
  }
  std::size_t nodes = 1;
  for (int a = 0; a < f.dim; ++a) nodes *= static_cast<std::size_t>(f.resolution);
  const std::size_t count = nodes * static_cast<std::size_t>(f.components);
  if (bytes.size() != kFieldHeaderBytes + 8 * count) {
    throw FieldIoError(path.string() + ": payload has " + std::to_string(bytes.size() - kFieldHeaderBytes) +
                       " bytes, header implies " + std::to_string(8 * count));
  }
  f.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    f.data[i] = std::bit_cast<double>(detail::get_le(bytes.data() + kFieldHeaderBytes + 8 * i, 8));
    if (!std::isfinite(f.data[i])) {
      throw FieldIoError(path.string() + ": non-finite value at node " +
                         std::to_string(i / static_cast<std::size_t>(f.components)));
    }
  }
  return f;
}

namespace detail {

inline void check_header(const std::filesystem::path& path, const FieldFile& f, const PeriodicGrid& grid,
                         int components) {
  if (f.dim != grid.dim() || f.resolution != grid.resolution()) {
    throw FieldIoError(path.string() + ": dimension mismatch (file n=" + std::to_string(f.dim) +
                       ", N=" + std::to_string(f.resolution) + "; grid n=" + std::to_string(grid.dim()) +
                       ", N=" + std::to_string(grid.resolution()) + ")");
  }
  if (f.components != components) {
    throw FieldIoError(path.string() + ": expected " + std::to_string(components) + " components per node, found " +
                       std::to_string(f.components));
  }
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const ScalarField& field) {
  FieldFile f{field.grid().dim(), field.grid().resolution(), 1,
              std::vector<double>(field.values().begin(), field.values().end())};
  write_field_file(path, f);
}

/// Reads a scalar field; the grid comes from the header.
[[nodiscard]] inline ScalarField read_field(const std::filesystem::path& path) {
  auto f = read_field_file(path);
  if (f.components != 1) throw FieldIoError(path.string() + ": not a scalar field");
  PeriodicGrid grid;
  try {
    grid = PeriodicGrid(f.dim, f.resolution);
  } catch (const GridError& e) {
    throw FieldIoError(path.string() + ": " + e.what());
  }
  return ScalarField(grid, std::move(f.data));
}

/// Reads a scalar field that must live on `grid`.
[[nodiscard]] inline ScalarField read_field(const std::filesystem::path& path, const PeriodicGrid& grid) {
  auto f = read_field_file(path);
  detail::check_header(path, f, grid, 1);
  return ScalarField(grid, std::move(f.data));
}

inline void write_tensor_field(const std::filesystem::path& path, const PeriodicGrid& grid,
                               const std::vector<SymTensor>& tensors) {
  const int comps = SymTensor::packed_size(grid.dim());
  FieldFile f{grid.dim(), grid.resolution(), comps, {}};
  f.data.reserve(tensors.size() * static_cast<std::size_t>(comps));
  for (const auto& t : tensors)
    for (double v : t.packed()) f.data.push_back(v);
  write_field_file(path, f);
}

[[nodiscard]] inline std::vector<SymTensor> read_tensor_field(const std::filesystem::path& path,
                                                              const PeriodicGrid& grid) {
  const auto f = read_field_file(path);
  const int comps = SymTensor::packed_size(grid.dim());
  detail::check_header(path, f, grid, comps);
  std::vector<SymTensor> out(grid.node_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = SymTensor::from_packed(grid.dim(), std::span<const double>(f.data).subspan(i * static_cast<std::size_t>(comps),
                                                                                       static_cast<std::size_t>(comps)));
  }
  return out;
}

inline void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FieldIoError("cannot open " + path.string() + " for writing");
  const auto& g = field.grid();
  for (int a = 0; a < g.dim(); ++a) out << 'i' << (a + 1) << ',';
  out << "value\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (NodeIndex i = 0; i < field.size(); ++i) {
    const auto m = g.unravel(i);
    for (int a = 0; a < g.dim(); ++a) out << m[a] << ',';
    out << field[i] << '\n';
  }
}

}  // namespace ksig
