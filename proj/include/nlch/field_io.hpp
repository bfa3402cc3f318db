#pragma once

#include "nlch/diagnostics.hpp"
#include "nlch/grid.hpp"

#include <string>
#include <vector>

namespace nlch {

// Binary field dump, all little-endian:
//   "NLCH" | u8 version = 1 | u32 dim | u32 n per axis | f64 length per axis |
//   f64 time | f64 values, x fastest.

struct FieldDump {
  Grid grid;
  double time = 0.0;
  Field values;
};

void write_field(const std::string& path, const Grid& g, const Field& u, double time);
FieldDump read_field(const std::string& path);

/// series.csv: t,mass,min_u,max_u,l2_norm,h1_seminorm,energy,dist_to_ref,clamp_events
void write_series_csv(const std::string& path, const TrajectoryRecord& rec);

/// Generic numeric CSV; every column must have the same length.
void write_columns_csv(const std::string& path, const std::vector<std::string>& header,
                       const std::vector<std::vector<double>>& columns);

}  // namespace nlch
