#include "ampcc/map_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ampcc/types.hpp"

namespace ampcc {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_map(std::ostream& out, const VoxelGrid& grid) {
  out << "ampmap 1\n";
  out << "origin " << fmt_double(grid.origin().x()) << ' '
      << fmt_double(grid.origin().y()) << ' ' << fmt_double(grid.origin().z())
      << '\n';
  out << "resolution " << fmt_double(grid.resolution()) << '\n';
  out << "dims " << grid.dims().x() << ' ' << grid.dims().y() << ' '
      << grid.dims().z() << '\n';

  const auto& occ = grid.occupancy();
  std::vector<std::pair<std::uint64_t, int>> runs;
  for (std::size_t i = 0; i < occ.size(); ++i) {
    const int bit = occ[i] ? 1 : 0;
    if (!runs.empty() && runs.back().second == bit) {
      ++runs.back().first;
    } else {
      runs.emplace_back(1, bit);
    }
  }
  out << "rle " << runs.size();
  for (const auto& [len, bit] : runs) out << ' ' << len << 'x' << bit;
  out << "\nend\n";
}

void write_map_file(const std::string& path, const VoxelGrid& grid) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open map file for writing: " + path);
  write_map(f, grid);
}

VoxelGrid read_map(std::istream& in) {
  std::string tok;
  int version = 0;
  if (!(in >> tok >> version) || tok != "ampmap" || version != 1) {
    throw ConfigError("map: expected header 'ampmap 1'");
  }
  Vec3 origin;
  double resolution = 0.0;
  Vec3i dims;
  if (!(in >> tok) || tok != "origin" ||
      !(in >> origin.x() >> origin.y() >> origin.z())) {
    throw ConfigError("map: malformed origin line");
  }
  if (!(in >> tok) || tok != "resolution" || !(in >> resolution)) {
    throw ConfigError("map: malformed resolution line");
  }
  if (!(in >> tok) || tok != "dims" ||
      !(in >> dims.x() >> dims.y() >> dims.z())) {
    throw ConfigError("map: malformed dims line");
  }
  if (resolution <= 0.0 || dims.minCoeff() < 1) {
    throw ConfigError("map: resolution must be > 0 and dims >= 1");
  }

  VoxelGrid grid(origin, resolution, dims);
  std::size_t pair_count = 0;
  if (!(in >> tok) || tok != "rle" || !(in >> pair_count)) {
    throw ConfigError("map: malformed rle line");
  }
  auto& occ = grid.occupancy();
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < pair_count; ++i) {
    std::uint64_t len = 0;
    char sep = 0;
    int bit = -1;
    if (!(in >> len >> sep >> bit) || sep != 'x' || (bit != 0 && bit != 1)) {
      throw ConfigError("map: malformed rle pair " + std::to_string(i));
    }
    if (cursor + len > occ.size()) {
      throw ConfigError("map: rle runs exceed cell count");
    }
    std::fill(occ.begin() + cursor, occ.begin() + cursor + len,
              static_cast<std::uint8_t>(bit));
    cursor += len;
  }
  if (cursor != occ.size()) {
    throw ConfigError("map: rle runs cover " + std::to_string(cursor) +
                      " of " + std::to_string(occ.size()) + " cells");
  }
  if (!(in >> tok) || tok != "end") {
    throw ConfigError("map: missing trailing 'end'");
  }
  return grid;
}

VoxelGrid read_map_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open map file: " + path);
  return read_map(f);
}

}  // namespace ampcc
