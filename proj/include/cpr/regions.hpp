#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cpr/stability.hpp"

namespace cpr {

struct AxisSpec {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.001;
  // Number of lattice points lo, lo+step, ..., <= hi (0 when hi < lo).
  std::size_t points() const;
  double value(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct GridSpec {
  std::vector<AxisSpec> axes;  // one per user class
  std::size_t cell_count() const;
  std::vector<std::size_t> shape() const;
};

struct RegionCell {
  std::vector<double> load;
  StabilityClass verdict = StabilityClass::Indeterminate;
  bool satisfied = false;  // criterion satisfied at this cell
  std::vector<double> success_probs;
  std::vector<double> throughput;
  double total_throughput = 0.0;
};

struct RegionMetadata {
  std::string config_digest;
  std::string criterion;
  double stable_tol = 0.0, equal_tol = 0.0, de_tol = 0.0;
  int max_iter = 0;
};

// Cells are stored row-major with the last axis fastest.
struct RegionMap {
  GridSpec grid;
  RegionMetadata meta;
  std::vector<RegionCell> cells;

  std::size_t index(const std::vector<std::size_t>& idx) const;
  const RegionCell& at(const std::vector<std::size_t>& idx) const;
};

struct MapOptions {
  int workers = 1;
  std::size_t max_cells = 2'000'000;  // resource guard
  StabilityTols tols;
  bool round_success = false;
};

// Classifies every lattice point against the criterion. Deterministic given
// config and tolerances regardless of worker count.
RegionMap map_region(const SystemConfig& config, const GridSpec& grid,
                     const StabilityCriterion& criterion, const MapOptions& opts = {});

// Populates per-cell throughput (verdicts included as a side product).
RegionMap throughput_surface(const SystemConfig& config, const GridSpec& grid,
                             const MapOptions& opts = {});

using Polyline = std::vector<std::array<double, 2>>;

// Marching-squares contour between satisfied and unsatisfied cells; vertices
// at cell-edge midpoints. Planar maps only.
std::vector<Polyline> extract_boundary(const RegionMap& map);

struct ConvexityWitness {
  std::vector<double> a, b, midpoint;
};

struct ConvexityReport {
  bool convex = true;
  std::vector<ConvexityWitness> counterexamples;
};

// Samples pairs of satisfied cells; reports witnesses where the floor-rounded
// midpoint cell is unsatisfied. Planar maps only.
ConvexityReport convexity_probe(const RegionMap& map, int trials, std::uint64_t seed = 1);

void write_region_csv(const RegionMap& map, std::ostream& os);
void write_region_json(const RegionMap& map, std::ostream& os);
void write_boundary_csv(const std::vector<Polyline>& polylines, std::ostream& os);

}  // namespace cpr
