#include "solvate/field_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "solvate/errors.hpp"

namespace solvate {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'L', 'V', 'F', 'L', 'D', '1'};

template <class T>
void put(std::string& buf, std::size_t offset, T value) {
  std::memcpy(buf.data() + offset, &value, sizeof(T));
}

template <class T>
T get(const std::string& buf, std::size_t offset) {
  T v;
  std::memcpy(&v, buf.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::string field_csv(const GridPtr& grid, const std::vector<double>& values, int components) {
  std::string out;
  const int dim = grid->dim();
  static const char* axes[3] = {"i", "j", "k"};
  for (int d = 0; d < dim; ++d) out += fmt::format("{},", axes[d]);
  if (components == 1) {
    out += "value\n";
  } else {
    for (int c = 0; c < components; ++c) out += fmt::format("c{}{}", c, c + 1 < components ? "," : "\n");
  }
  for (std::size_t n = 0; n < grid->node_count(); ++n) {
    const auto m = grid->multi_index(n);
    for (int d = 0; d < dim; ++d) out += fmt::format("{},", m[d]);
    for (int c = 0; c < components; ++c)
      out += fmt::format("{:.17g}{}", values[n * components + c], c + 1 < components ? "," : "\n");
  }
  return out;
}

void write_field_csv(const ScalarField& f, const std::filesystem::path& path) {
  write_file_atomic(path, field_csv(f.grid(), f.data()));
}

void write_field_binary(const GridPtr& grid, const std::vector<double>& values, int components,
                        const std::filesystem::path& path, std::uint64_t config_hash) {
  if (values.size() != grid->node_count() * static_cast<std::size_t>(components))
    throw ShapeError("binary export: value count does not match grid");
  std::string buf(64 + 24, '\0');
  std::memcpy(buf.data(), kMagic, 8);
  put<std::uint16_t>(buf, 8, 1);
  put<std::uint16_t>(buf, 10, 1);
  put<std::uint16_t>(buf, 12, static_cast<std::uint16_t>(grid->dim()));
  put<std::uint16_t>(buf, 14, static_cast<std::uint16_t>(components));
  for (int d = 0; d < 3; ++d) put<std::uint32_t>(buf, 16 + 4 * d, static_cast<std::uint32_t>(grid->nodes(d)));
  put<std::uint32_t>(buf, 28, grid->is_radial() ? 1u : 0u);
  for (int d = 0; d < 3; ++d) put<double>(buf, 32 + 8 * d, grid->lo(d));
  put<std::uint64_t>(buf, 56, config_hash);
  for (int d = 0; d < 3; ++d) put<double>(buf, 64 + 8 * d, grid->hi(d));
  const std::size_t off = buf.size();
  buf.resize(off + values.size() * sizeof(double));
  std::memcpy(buf.data() + off, values.data(), values.size() * sizeof(double));
  write_file_atomic(path, buf);
}

void write_field_binary(const ScalarField& f, const std::filesystem::path& path, std::uint64_t config_hash) {
  write_field_binary(f.grid(), f.data(), 1, path, config_hash);
}

BinaryField read_field_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  if (buf.size() < 88 || std::memcmp(buf.data(), kMagic, 8) != 0)
    throw Error(fmt::format("{} is not a field file", path.string()));
  BinaryField f;
  if (get<std::uint16_t>(buf, 10) != 1) throw Error("unsupported dtype in field file");
  f.dim = get<std::uint16_t>(buf, 12);
  f.components = get<std::uint16_t>(buf, 14);
  for (int d = 0; d < 3; ++d) f.counts[d] = get<std::uint32_t>(buf, 16 + 4 * d);
  f.radial = (get<std::uint32_t>(buf, 28) & 1u) != 0;
  for (int d = 0; d < 3; ++d) f.lo[d] = get<double>(buf, 32 + 8 * d);
  f.config_hash = get<std::uint64_t>(buf, 56);
  for (int d = 0; d < 3; ++d) f.hi[d] = get<double>(buf, 64 + 8 * d);
  const std::size_t n = static_cast<std::size_t>(f.counts[0]) * f.counts[1] * f.counts[2] * f.components;
  if (buf.size() != 88 + n * sizeof(double)) throw Error("field file is truncated");
  f.data.resize(n);
  std::memcpy(f.data.data(), buf.data() + 88, n * sizeof(double));
  return f;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", tmp.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace solvate
