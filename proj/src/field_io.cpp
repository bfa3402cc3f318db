#include "nlch/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace nlch {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'C', 'H'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_bytes(std::istream& is, int count, const std::string& path) {
  unsigned char b[8] = {};
  if (!is.read(reinterpret_cast<char*>(b), count)) throw Error(path + ": truncated field dump");
  std::uint64_t v = 0;
  for (int k = 0; k < count; ++k) v |= std::uint64_t(b[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& is, const std::string& path) {
  return std::bit_cast<double>(get_bytes(is, 8, path));
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  return os;
}

void put_number(std::ostream& os, double v) {
  if (std::isnan(v))
    os << "nan";
  else
    os << v;
}

}  // namespace

void write_field(const std::string& path, const Grid& g, const Field& u, double time) {
  require_on_grid(g, u.size(), "write_field");
  auto os = open_out(path, std::ios::binary);
  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  put_u32(os, std::uint32_t(g.dim));
  for (int a = 0; a < g.dim; ++a) put_u32(os, std::uint32_t(g.n));
  for (int a = 0; a < g.dim; ++a) put_f64(os, g.length);
  put_f64(os, time);
  for (Eigen::Index i = 0; i < u.size(); ++i) put_f64(os, u(i));
  if (!os) throw Error("write failed for '" + path + "'");
}

FieldDump read_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw Error(path + ": not an NLCH field dump");
  if (get_bytes(is, 1, path) != kVersion) throw Error(path + ": unsupported dump version");
  const auto dim = std::uint32_t(get_bytes(is, 4, path));
  if (dim < 1 || dim > 2) throw Error(path + ": unsupported dimension");
  std::uint32_t n[2] = {0, 0};
  double len[2] = {0, 0};
  for (std::uint32_t a = 0; a < dim; ++a) n[a] = std::uint32_t(get_bytes(is, 4, path));
  for (std::uint32_t a = 0; a < dim; ++a) len[a] = get_f64(is, path);
  if (dim == 2 && (n[0] != n[1] || len[0] != len[1]))
    throw Error(path + ": only square grids are supported");
  FieldDump d;
  d.grid = build_grid(int(dim), int(n[0]), len[0]);
  d.time = get_f64(is, path);
  d.values.resize(d.grid.size());
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values(i) = get_f64(is, path);
  if (is.peek() != std::char_traits<char>::eof()) throw Error(path + ": trailing bytes after field");
  return d;
}

void write_series_csv(const std::string& path, const TrajectoryRecord& rec) {
  auto os = open_out(path);
  os << std::setprecision(17);
  os << "t,mass,min_u,max_u,l2_norm,h1_seminorm,energy,dist_to_ref,clamp_events\n";
  for (std::size_t k = 0; k < rec.size(); ++k) {
    for (double v : {rec.times[k], rec.mass[k], rec.min_u[k], rec.max_u[k], rec.l2_norm[k],
                     rec.h1_seminorm[k], rec.energy[k], rec.dist_to_ref[k]}) {
      put_number(os, v);
      os << ',';
    }
    os << rec.clamp_events[k] << '\n';
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw Error("csv header and column count differ");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw Error("csv columns have different lengths");
  auto os = open_out(path);
  os << std::setprecision(17);
  for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
  os << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) os << ',';
      put_number(os, columns[c][r]);
    }
    os << '\n';
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

}  // namespace nlch
