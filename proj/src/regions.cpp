#include "cpr/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "cpr/parallel.hpp"

namespace cpr {

std::size_t AxisSpec::points() const {
  if (!(step > 0.0)) throw std::invalid_argument("grid axis: step must be > 0");
  if (!(lo >= 0.0)) throw std::invalid_argument("grid axis: lo must be >= 0");
  if (hi < lo) return 0;
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::size_t GridSpec::cell_count() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.points();
  return axes.empty() ? 0 : n;
}

std::vector<std::size_t> GridSpec::shape() const {
  std::vector<std::size_t> s;
  s.reserve(axes.size());
  for (const auto& a : axes) s.push_back(a.points());
  return s;
}

std::size_t RegionMap::index(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t k = 0; k < idx.size(); ++k) flat = flat * grid.axes[k].points() + idx[k];
  return flat;
}

const RegionCell& RegionMap::at(const std::vector<std::size_t>& idx) const {
  return cells[index(idx)];
}

namespace {

std::vector<double> cell_load(const GridSpec& grid, std::size_t flat) {
  std::vector<double> g(grid.axes.size());
  for (std::size_t k = grid.axes.size(); k-- > 0;) {
    const std::size_t n = grid.axes[k].points();
    g[k] = grid.axes[k].value(flat % n);
    flat /= n;
  }
  return g;
}

// Decides criterion satisfaction from an already-computed verdict so each
// cell costs one pair of fixed-point solves.
bool satisfied_by(const SystemConfig& config, const StabilityCriterion& criterion,
                  const StabilityVerdict& v) {
  switch (criterion.kind) {
    case StabilityCriterion::Kind::Stable:
      return v.verdict == StabilityClass::Stable;
    case StabilityCriterion::Kind::WeaklyStable:
      return v.verdict == StabilityClass::Stable || v.verdict == StabilityClass::WeaklyStable;
    case StabilityCriterion::Kind::EpsilonStable: {
      if (v.verdict == StabilityClass::Indeterminate) return false;
      for (int k = 0; k < config.num_user_classes; ++k) {
        const auto& d = config.effective_dists[k];
        if (!d.min_degree_two())
          throw std::logic_error("epsilon criterion requires min degree two");
        if (v.q_from_ones[k] > d.excess(criterion.eps[k])) return false;
      }
      return true;
    }
  }
  return false;
}

RegionMap evaluate_grid(const SystemConfig& config, const GridSpec& grid,
                        const StabilityCriterion& criterion, const MapOptions& opts,
                        bool want_throughput) {
  if (static_cast<int>(grid.axes.size()) != config.num_user_classes)
    throw std::invalid_argument("grid needs one axis per user class");
  const std::size_t n = grid.cell_count();
  if (n > opts.max_cells)
    throw std::length_error("grid has " + std::to_string(n) + " cells, cap is " +
                            std::to_string(opts.max_cells));
  RegionMap map;
  map.grid = grid;
  map.meta.criterion = to_string(criterion);
  map.meta.stable_tol = opts.tols.stable_tol;
  map.meta.equal_tol = opts.tols.equal_tol;
  map.meta.de_tol = opts.tols.de_tol;
  map.meta.max_iter = opts.tols.max_iter;
  map.cells.resize(n);
  parallel_for_index(n, opts.workers, [&](std::size_t i) {
    RegionCell& cell = map.cells[i];
    cell.load = cell_load(grid, i);
    const auto verdict = classify_load(config, cell.load, opts.tols);
    cell.verdict = verdict.verdict;
    cell.success_probs = verdict.success_probs;
    if (opts.round_success)
      for (double& p : cell.success_probs)
        if (p > 0.99999) p = 1.0;
    cell.satisfied = satisfied_by(config, criterion, verdict);
    if (want_throughput) {
      cell.throughput.resize(cell.load.size());
      cell.total_throughput = 0.0;
      for (std::size_t k = 0; k < cell.load.size(); ++k) {
        cell.throughput[k] = cell.load[k] * cell.success_probs[k];
        cell.total_throughput += cell.throughput[k];
      }
    }
  });
  return map;
}

}  // namespace

RegionMap map_region(const SystemConfig& config, const GridSpec& grid,
                     const StabilityCriterion& criterion, const MapOptions& opts) {
  return evaluate_grid(config, grid, criterion, opts, /*want_throughput=*/true);
}

RegionMap throughput_surface(const SystemConfig& config, const GridSpec& grid,
                             const MapOptions& opts) {
  return evaluate_grid(config, grid, StabilityCriterion::stable(), opts,
                       /*want_throughput=*/true);
}

namespace {

// Segment endpoints are encoded as half-integer lattice coordinates
// (x2, y2) = (2*i, 2*j) grid points, odd values are edge midpoints.
struct Pt {
  long x2, y2;
  bool operator<(const Pt& o) const { return x2 < o.x2 || (x2 == o.x2 && y2 < o.y2); }
  bool operator==(const Pt& o) const { return x2 == o.x2 && y2 == o.y2; }
};

}  // namespace

std::vector<Polyline> extract_boundary(const RegionMap& map) {
  if (map.grid.axes.size() != 2)
    throw std::invalid_argument("boundary extraction is defined for planar maps only");
  const std::size_t nx = map.grid.axes[0].points();
  const std::size_t ny = map.grid.axes[1].points();
  std::vector<Polyline> out;
  if (nx < 2 || ny < 2) return out;
  const auto sat = [&](std::size_t i, std::size_t j) {
    return map.cells[i * ny + j].satisfied;
  };

  // Marching squares: one or two segments per 2x2 block, endpoints on the
  // midpoints of block edges with a state change.
  std::vector<std::pair<Pt, Pt>> segs;
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const bool c00 = sat(i, j), c10 = sat(i + 1, j);
      const bool c01 = sat(i, j + 1), c11 = sat(i + 1, j + 1);
      const int pattern = (c00 ? 1 : 0) | (c10 ? 2 : 0) | (c11 ? 4 : 0) | (c01 ? 8 : 0);
      if (pattern == 0 || pattern == 15) continue;
      const long x = 2 * static_cast<long>(i), y = 2 * static_cast<long>(j);
      const Pt bottom{x + 1, y};    // between (i,j) and (i+1,j)
      const Pt top{x + 1, y + 2};   // between (i,j+1) and (i+1,j+1)
      const Pt left{x, y + 1};      // between (i,j) and (i,j+1)
      const Pt right{x + 2, y + 1}; // between (i+1,j) and (i+1,j+1)
      switch (pattern) {
        case 1: case 14: segs.push_back({left, bottom}); break;
        case 2: case 13: segs.push_back({bottom, right}); break;
        case 4: case 11: segs.push_back({right, top}); break;
        case 8: case 7: segs.push_back({top, left}); break;
        case 3: case 12: segs.push_back({left, right}); break;
        case 6: case 9: segs.push_back({bottom, top}); break;
        case 5: segs.push_back({left, bottom}); segs.push_back({right, top}); break;
        case 10: segs.push_back({bottom, right}); segs.push_back({top, left}); break;
      }
    }
  }

  // Chain segments into polylines by shared endpoints.
  std::multimap<Pt, std::size_t> at_point;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    at_point.insert({segs[s].first, s});
    at_point.insert({segs[s].second, s});
  }
  std::vector<bool> used(segs.size(), false);
  const auto coords = [&](const Pt& p) {
    return std::array<double, 2>{map.grid.axes[0].lo + 0.5 * p.x2 * map.grid.axes[0].step,
                                 map.grid.axes[1].lo + 0.5 * p.y2 * map.grid.axes[1].step};
  };
  const auto take_next = [&](const Pt& p, std::size_t& seg) {
    auto [lo, hi] = at_point.equal_range(p);
    for (auto it = lo; it != hi; ++it) {
      if (!used[it->second]) {
        seg = it->second;
        return true;
      }
    }
    return false;
  };
  for (std::size_t s = 0; s < segs.size(); ++s) {
    if (used[s]) continue;
    used[s] = true;
    std::vector<Pt> chain{segs[s].first, segs[s].second};
    for (int dir = 0; dir < 2; ++dir) {
      while (true) {
        std::size_t nxt;
        if (!take_next(chain.back(), nxt)) break;
        used[nxt] = true;
        chain.push_back(segs[nxt].first == chain.back() ? segs[nxt].second : segs[nxt].first);
      }
      std::reverse(chain.begin(), chain.end());
    }
    Polyline poly;
    poly.reserve(chain.size());
    for (const Pt& p : chain) poly.push_back(coords(p));
    out.push_back(std::move(poly));
  }
  return out;
}

ConvexityReport convexity_probe(const RegionMap& map, int trials, std::uint64_t seed) {
  if (map.grid.axes.size() != 2)
    throw std::invalid_argument("convexity probe is defined for planar maps only");
  ConvexityReport rep;
  const std::size_t ny = map.grid.axes[1].points();
  std::vector<std::size_t> satisfied;
  for (std::size_t i = 0; i < map.cells.size(); ++i)
    if (map.cells[i].satisfied) satisfied.push_back(i);
  if (satisfied.size() < 2) return rep;  // vacuously convex
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, satisfied.size() - 1);
  for (int t = 0; t < trials; ++t) {
    const std::size_t a = satisfied[pick(rng)], b = satisfied[pick(rng)];
    // Floor-rounded midpoint: dominated by the true midpoint, so a witness is
    // a genuine convexity violation for a downward-closed region.
    const std::size_t mi = ((a / ny) + (b / ny)) / 2;
    const std::size_t mj = ((a % ny) + (b % ny)) / 2;
    const std::size_t m = mi * ny + mj;
    if (!map.cells[m].satisfied) {
      rep.convex = false;
      rep.counterexamples.push_back(
          {map.cells[a].load, map.cells[b].load, map.cells[m].load});
      if (rep.counterexamples.size() >= 8) break;
    }
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_region_csv(const RegionMap& map, std::ostream& os) {
  const std::size_t K = map.grid.axes.size();
  for (std::size_t k = 0; k < K; ++k) os << "G" << k + 1 << ",";
  os << "verdict,satisfied";
  for (std::size_t k = 0; k < K; ++k) os << ",Psuc" << k + 1;
  os << ",Theta_total\n";
  for (const auto& cell : map.cells) {
    for (std::size_t k = 0; k < K; ++k) os << fmt(cell.load[k]) << ",";
    os << to_string(cell.verdict) << "," << (cell.satisfied ? 1 : 0);
    for (std::size_t k = 0; k < K; ++k) os << "," << fmt(cell.success_probs[k]);
    os << "," << fmt(cell.total_throughput) << "\n";
  }
}

void write_region_json(const RegionMap& map, std::ostream& os) {
  os << "{\"metadata\":{\"config_digest\":\"" << map.meta.config_digest
     << "\",\"criterion\":\"" << map.meta.criterion
     << "\",\"stable_tol\":" << fmt(map.meta.stable_tol)
     << ",\"equal_tol\":" << fmt(map.meta.equal_tol)
     << ",\"de_tol\":" << fmt(map.meta.de_tol) << ",\"max_iter\":" << map.meta.max_iter
     << ",\"axes\":[";
  for (std::size_t k = 0; k < map.grid.axes.size(); ++k) {
    const auto& a = map.grid.axes[k];
    os << (k ? "," : "") << "{\"lo\":" << fmt(a.lo) << ",\"hi\":" << fmt(a.hi)
       << ",\"step\":" << fmt(a.step) << "}";
  }
  os << "]},\"cells\":[";
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    const auto& c = map.cells[i];
    os << (i ? "," : "") << "{\"g\":[";
    for (std::size_t k = 0; k < c.load.size(); ++k) os << (k ? "," : "") << fmt(c.load[k]);
    os << "],\"verdict\":\"" << to_string(c.verdict) << "\",\"satisfied\":"
       << (c.satisfied ? "true" : "false") << ",\"psuc\":[";
    for (std::size_t k = 0; k < c.success_probs.size(); ++k)
      os << (k ? "," : "") << fmt(c.success_probs[k]);
    os << "],\"theta_total\":" << fmt(c.total_throughput) << "}";
  }
  os << "]}";
}

void write_boundary_csv(const std::vector<Polyline>& polylines, std::ostream& os) {
  os << "polyline,G1,G2\n";
  for (std::size_t p = 0; p < polylines.size(); ++p)
    for (const auto& pt : polylines[p])
      os << p << "," << fmt(pt[0]) << "," << fmt(pt[1]) << "\n";
}

}  // namespace cpr
