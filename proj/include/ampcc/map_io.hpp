#pragma once

#include <iosfwd>
#include <string>

#include "ampcc/voxel_grid.hpp"

namespace ampcc {

/// Plain-text grid format, version 1 (see docs/formats.md):
///
///   ampmap 1
///   origin <ox> <oy> <oz>
///   resolution <r>
///   dims <nx> <ny> <nz>
///   rle <pair-count> <run>x<bit> <run>x<bit> ...
///   end
///
/// The rle payload covers every cell in x-fastest linear order; runs must
/// sum to nx*ny*nz. Floats are written with enough digits to round-trip.
void write_map(std::ostream& out, const VoxelGrid& grid);
void write_map_file(const std::string& path, const VoxelGrid& grid);

VoxelGrid read_map(std::istream& in);
VoxelGrid read_map_file(const std::string& path);

}  // namespace ampcc
