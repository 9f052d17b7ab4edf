#pragma once

// Field export: flat CSV (index coordinates + value) and a structured binary
// layout with a 64-byte little-endian header.
//
//   0  char[8]  magic "SOLVFLD1"
//   8  u16      version (1)
//  10  u16      dtype (1 = float64)
//  12  u16      ndim
//  14  u16      components per node
//  16  u32[3]   node counts
//  28  u32      flags (bit 0: radial)
//  32  f64[3]   lower corner
//  56  u64      config hash
// followed by node-major float64 data. Spacing is recovered from the counts
// and the `hi` block written right after the header (f64[3]).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "solvate/grid.hpp"

namespace solvate {

struct BinaryField {
  int dim = 1;
  bool radial = false;
  int components = 1;
  std::array<std::uint32_t, 3> counts{1, 1, 1};
  std::array<double, 3> lo{0, 0, 0};
  std::array<double, 3> hi{0, 0, 0};
  std::uint64_t config_hash = 0;
  std::vector<double> data;
};

std::string field_csv(const GridPtr& grid, const std::vector<double>& values, int components = 1);
void write_field_csv(const ScalarField& f, const std::filesystem::path& path);

void write_field_binary(const GridPtr& grid, const std::vector<double>& values, int components,
                        const std::filesystem::path& path, std::uint64_t config_hash);
void write_field_binary(const ScalarField& f, const std::filesystem::path& path, std::uint64_t config_hash);
BinaryField read_field_binary(const std::filesystem::path& path);

/// Write via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace solvate
