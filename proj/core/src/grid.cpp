#include "peeropt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace peeropt {

std::array<double, 2> Grid::sigma_range() const {
  double lo = 1.0, hi = 1.0;
  for (int n = 1; n <= last_block(); ++n) {
    const double s = sigma(n);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

double Grid::max_eta() const {
  double worst = 0;
  for (int n = 1; n <= last_block(); ++n)
    worst = std::max(worst, std::abs(sigma(n) - 1.0) / h(n));
  return worst;
}

Grid uniform_grid(double t0, double t1, int nsteps) {
  if (nsteps < 1) throw std::invalid_argument("grid needs at least one step");
  if (!(t1 > t0)) throw std::invalid_argument("grid needs t1 > t0");
  Grid g;
  g.t.resize(static_cast<size_t>(nsteps) + 1);
  for (int n = 0; n <= nsteps; ++n)
    g.t[static_cast<size_t>(n)] = t0 + (t1 - t0) * n / nsteps;
  g.t.back() = t1;
  return g;
}

Grid grid_from_points(std::vector<double> pts) {
  if (pts.size() < 2)
    throw std::invalid_argument("grid needs at least two points");
  for (size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i] > pts[i - 1]))
      throw std::invalid_argument("grid points must increase strictly");
  Grid g;
  g.t = std::move(pts);
  return g;
}

Grid flipped(const Grid& g) {
  const double lo = g.t_begin(), hi = g.t_end();
  Grid out;
  out.t.resize(g.t.size());
  for (size_t i = 0; i < g.t.size(); ++i)
    out.t[i] = lo + hi - g.t[g.t.size() - 1 - i];
  out.t.front() = lo;
  out.t.back() = hi;
  return out;
}

}  // namespace peeropt
