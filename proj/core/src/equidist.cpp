#include "peeropt/equidist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace peeropt {

namespace {

double simpson(const MeshDensity& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

bool constraints_ok(const Grid& g, const EquidistOptions& opt) {
  for (int n = 1; n <= g.last_block(); ++n) {
    const double s = g.sigma(n);
    if (s < opt.sigma_min || s > opt.sigma_max) return false;
    if (std::abs(s - 1.0) / g.h(n) > opt.eta_max) return false;
  }
  return true;
}

// One full mesh generation by iterated inversion of the cumulative integral.
std::vector<double> generate(const MeshDensity& psi, double t0, double t1,
                             int nsteps, const EquidistOptions& opt,
                             int* passes_used) {
  const size_t np = static_cast<size_t>(nsteps) + 1;
  std::vector<double> pts(np);
  for (size_t j = 0; j < np; ++j)
    pts[j] = t0 + (t1 - t0) * static_cast<double>(j) / nsteps;
  pts.back() = t1;

  std::vector<double> w(static_cast<size_t>(nsteps));
  std::vector<double> cum(np);
  std::vector<double> next(np);
  for (int pass = 0; pass < opt.max_passes; ++pass) {
    cum[0] = 0;
    for (int i = 0; i < nsteps; ++i) {
      w[static_cast<size_t>(i)] =
          simpson(psi, pts[static_cast<size_t>(i)],
                  pts[static_cast<size_t>(i) + 1], opt.cell_quadrature);
      cum[static_cast<size_t>(i) + 1] =
          cum[static_cast<size_t>(i)] + w[static_cast<size_t>(i)];
    }
    const double total = cum.back();
    next.front() = t0;
    next.back() = t1;
    size_t cell = 0;
    for (int j = 1; j < nsteps; ++j) {
      const double target = total * j / nsteps;
      while (cell + 1 < static_cast<size_t>(nsteps) &&
             cum[cell + 1] < target)
        ++cell;
      const double span = pts[cell + 1] - pts[cell];
      const double frac =
          w[cell] > 0 ? (target - cum[cell]) / w[cell] : 0.5;
      next[static_cast<size_t>(j)] = pts[cell] + frac * span;
    }
    double move = 0;
    for (size_t j = 0; j < np; ++j)
      move = std::max(move, std::abs(next[j] - pts[j]));
    pts.swap(next);
    if (passes_used) *passes_used = pass + 1;
    if (move <= opt.fixed_point_tol * (t1 - t0)) break;
  }
  return pts;
}

std::vector<double> midpoint_samples(const MeshDensity& psi,
                                     const std::vector<double>& pts) {
  std::vector<double> v(pts.size() - 1);
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    v[i] = psi(0.5 * (pts[i] + pts[i + 1]));
  return v;
}

void smooth_inplace(std::vector<double>& v, int passes) {
  if (v.size() < 3) return;
  std::vector<double> w(v.size());
  for (int p = 0; p < passes; ++p) {
    w.front() = 0.75 * v.front() + 0.25 * v[1];
    w.back() = 0.75 * v.back() + 0.25 * v[v.size() - 2];
    for (size_t i = 1; i + 1 < v.size(); ++i)
      w[i] = 0.25 * v[i - 1] + 0.5 * v[i] + 0.25 * v[i + 1];
    v.swap(w);
  }
}

MeshDensity piecewise_linear(std::vector<double> centers,
                             std::vector<double> values) {
  return [centers = std::move(centers),
          values = std::move(values)](double t) {
    if (t <= centers.front()) return values.front();
    if (t >= centers.back()) return values.back();
    const auto it = std::upper_bound(centers.begin(), centers.end(), t);
    const size_t i = static_cast<size_t>(it - centers.begin());
    const double s = (t - centers[i - 1]) / (centers[i] - centers[i - 1]);
    return (1.0 - s) * values[i - 1] + s * values[i];
  };
}

MeshDensity floored(const MeshDensity& psi, double t0, double t1) {
  double peak = 0;
  for (int i = 0; i <= 256; ++i)
    peak = std::max(peak, std::abs(psi(t0 + (t1 - t0) * i / 256.0)));
  const double floor_value = peak > 0 ? 1e-8 * peak : 1.0;
  return [psi, floor_value](double t) {
    return std::max(psi(t), floor_value);
  };
}

}  // namespace

MeshDensity ratio_limited(const MeshDensity& psi, double t0, double t1,
                          double rate, int samples) {
  if (samples < 2) throw std::invalid_argument("limiter needs two samples");
  const double dt = (t1 - t0) / (samples - 1);
  std::vector<double> grid(static_cast<size_t>(samples));
  std::vector<double> env(static_cast<size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    grid[static_cast<size_t>(i)] = t0 + i * dt;
    env[static_cast<size_t>(i)] = psi(grid[static_cast<size_t>(i)]);
  }
  // Sweeps carrying the currently dominating source (value, position).  Once
  // a source dominates another at some point it dominates at every later
  // point, because the ratio of two kernel tails 1/(1 + rate (t - s)) is
  // monotone in t, so a single carried pair computes the exact envelope.
  double best_v = env.front();
  double best_t = grid.front();
  for (int i = 1; i < samples; ++i) {
    const size_t k = static_cast<size_t>(i);
    const double cand = best_v / (1.0 + rate * (grid[k] - best_t));
    if (env[k] >= cand) {
      best_v = env[k];
      best_t = grid[k];
    } else {
      env[k] = cand;
    }
  }
  best_v = env.back();
  best_t = grid.back();
  for (int i = samples - 2; i >= 0; --i) {
    const size_t k = static_cast<size_t>(i);
    const double cand = best_v / (1.0 + rate * (best_t - grid[k]));
    if (env[k] >= cand) {
      best_v = env[k];
      best_t = grid[k];
    } else {
      env[k] = cand;
    }
  }
  return piecewise_linear(std::move(grid), std::move(env));
}

MeshDensity density_from_blocks(const Grid& g, const std::vector<double>& psi) {
  if (psi.size() != static_cast<size_t>(g.nsteps()))
    throw std::invalid_argument("density needs one value per slab");
  // constant on each slab [t_n, t_{n+1}): sharp transitions are kept and only
  // removed later by explicit smoothing when step constraints require it
  std::vector<double> edges = g.t;
  std::vector<double> values = psi;
  return [edges = std::move(edges), values = std::move(values)](double t) {
    if (t <= edges.front()) return values.front();
    if (t >= edges.back()) return values.back();
    const auto it = std::upper_bound(edges.begin(), edges.end(), t);
    return values[static_cast<size_t>(it - edges.begin()) - 1];
  };
}

// Scalar measure of how far a grid is from the constraint set; zero iff
// admissible.  Ratio-bound excesses are weighted up so that they dominate
// eta excesses of similar size when picking the closest candidate.
double constraint_violation(const Grid& g, const EquidistOptions& opt) {
  double v = 0;
  for (int n = 1; n <= g.last_block(); ++n) {
    const double s = g.sigma(n);
    v = std::max(v, std::abs(s - 1.0) / g.h(n) - opt.eta_max);
    v = std::max(v, 100.0 * (opt.sigma_min - s));
    v = std::max(v, 100.0 * (s - opt.sigma_max));
  }
  return std::max(0.0, v);
}

// Projection of the step sequence onto {sigma in range, |sigma-1| <= eta h}.
// Alternating forward and backward sweeps clamp each step into the window
// allowed by its neighbour; the rescale restores the interval length, which
// perturbs the window, so the sweeps are iterated.  Offending ratios land
// exactly on the window boundary, so unlike density smoothing the projection
// keeps the step contrast everywhere the constraints are inactive.
std::vector<double> project_steps(const std::vector<double>& pts,
                                  const EquidistOptions& opt) {
  const double t0 = pts.front(), t1 = pts.back();
  const size_t m = pts.size() - 1;
  std::vector<double> h(m);
  for (size_t n = 0; n < m; ++n) h[n] = pts[n + 1] - pts[n];
  const double r = opt.eta_max;
  for (int sweep = 0; sweep < opt.projection_sweeps; ++sweep) {
    for (size_t n = 1; n < m; ++n) {
      // window for h_n given h_{n-1}: |h_n - h_{n-1}| <= r h_{n-1} h_n
      double lo = std::max(h[n - 1] / (1.0 + r * h[n - 1]),
                           h[n - 1] * opt.sigma_min);
      double hi = h[n - 1] * opt.sigma_max;
      if (r * h[n - 1] < 1.0) hi = std::min(hi, h[n - 1] / (1.0 - r * h[n - 1]));
      h[n] = std::clamp(h[n], lo, hi);
    }
    for (size_t n = m - 1; n >= 1; --n) {
      double lo = std::max(h[n] / (1.0 + r * h[n]), h[n] / opt.sigma_max);
      double hi = h[n] / opt.sigma_min;
      if (r * h[n] < 1.0) hi = std::min(hi, h[n] / (1.0 - r * h[n]));
      h[n - 1] = std::clamp(h[n - 1], lo, hi);
    }
    double sum = 0;
    for (double hn : h) sum += hn;
    const double scale = (t1 - t0) / sum;
    for (double& hn : h) hn *= scale;
  }
  std::vector<double> out(pts.size());
  out.front() = t0;
  for (size_t n = 0; n < m; ++n) out[n + 1] = out[n] + h[n];
  out.back() = t1;
  return out;
}

}  // namespace

MeshDensity density_from_blocks(const Grid& g, const std::vector<double>& psi) {
  if (psi.size() != static_cast<size_t>(g.nsteps()))
    throw std::invalid_argument("density needs one value per slab");
  // constant on each slab [t_n, t_{n+1}): sharp transitions are kept and only
  // removed later by explicit smoothing when step constraints require it
  std::vector<double> edges = g.t;
  std::vector<double> values = psi;
  return [edges = std::move(edges), values = std::move(values)](double t) {
    if (t <= edges.front()) return values.front();
    if (t >= edges.back()) return values.back();
    const auto it = std::upper_bound(edges.begin(), edges.end(), t);
    return values[static_cast<size_t>(it - edges.begin()) - 1];
  };
}

EquidistResult equidistribute(const MeshDensity& psi, double t0, double t1,
                              int nsteps, const EquidistOptions& opt) {
  if (nsteps < 1)
    throw std::invalid_argument("equidistribution needs at least one step");
  if (!(t1 > t0)) throw std::invalid_argument("needs t1 > t0");

  MeshDensity current = floored(psi, t0, t1);
  EquidistResult res;
  std::vector<double> pts;
  double best_violation = 0;
  std::vector<double> best_pts;
  const auto attempt = [&] {
    int passes = 0;
    pts = generate(current, t0, t1, nsteps, opt, &passes);
    res.passes_used = passes;
    res.grid = grid_from_points(pts);
    res.constraints_ok = constraints_ok(res.grid, opt);
    const double v = constraint_violation(res.grid, opt);
    if (best_pts.empty() || v < best_violation) {
      best_violation = v;
      best_pts = pts;
    }
  };

  attempt();
  for (int pass = 0; !res.constraints_ok && pass < opt.smoothing_passes;
       ++pass) {
    std::vector<double> v = midpoint_samples(current, pts);
    smooth_inplace(v, 1);
    std::vector<double> centers(v.size());
    for (size_t i = 0; i < v.size(); ++i)
      centers[i] = 0.5 * (pts[i] + pts[i + 1]);
    current = piecewise_linear(std::move(centers), std::move(v));
    res.smoothing_rounds_used = pass + 1;
    attempt();
  }
  if (!res.constraints_ok && nsteps >= 2) {
    res.grid = grid_from_points(project_steps(best_pts, opt));
    res.constraints_ok = constraints_ok(res.grid, opt);
    res.projected = true;
  }
  return res;
}

EquidistResult equidistribute_fixed(const MeshDensity& psi, double t0,
                                    double t1, int nsteps,
                                    const std::vector<double>& fixed_points,
                                    const EquidistOptions& opt) {
  std::vector<double> inner;
  for (double f : fixed_points)
    if (f > t0 && f < t1) inner.push_back(f);
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  if (inner.empty()) return equidistribute(psi, t0, t1, nsteps, opt);

  std::vector<double> bounds;
  bounds.push_back(t0);
  bounds.insert(bounds.end(), inner.begin(), inner.end());
  bounds.push_back(t1);
  const int nseg = static_cast<int>(bounds.size()) - 1;
  if (nsteps < nseg)
    throw std::invalid_argument("not enough steps for the fixed points");

  const MeshDensity eff = floored(psi, t0, t1);
  std::vector<double> integral(static_cast<size_t>(nseg));
  double total = 0;
  for (int s = 0; s < nseg; ++s) {
    integral[static_cast<size_t>(s)] =
        simpson(eff, bounds[static_cast<size_t>(s)],
                bounds[static_cast<size_t>(s) + 1], 512);
    total += integral[static_cast<size_t>(s)];
  }

  // Proportional allotment with a floor of one step per segment, remainders
  // to the largest fractional parts.
  std::vector<int> count(static_cast<size_t>(nseg), 1);
  std::vector<double> quota(static_cast<size_t>(nseg));
  int assigned = nseg;
  for (int s = 0; s < nseg; ++s)
    quota[static_cast<size_t>(s)] =
        nsteps * integral[static_cast<size_t>(s)] / total;
  for (int s = 0; s < nseg; ++s) {
    const int extra = std::max(
        0, static_cast<int>(std::floor(quota[static_cast<size_t>(s)])) - 1);
    count[static_cast<size_t>(s)] += extra;
    assigned += extra;
  }
  std::vector<int> order(static_cast<size_t>(nseg));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = quota[static_cast<size_t>(a)] -
                      std::floor(quota[static_cast<size_t>(a)]);
    const double fb = quota[static_cast<size_t>(b)] -
                      std::floor(quota[static_cast<size_t>(b)]);
    return fa > fb;
  });
  for (size_t i = 0; assigned < nsteps; ++i) {
    ++count[static_cast<size_t>(order[i % order.size()])];
    ++assigned;
  }

  EquidistResult res;
  std::vector<double> pts;
  for (int s = 0; s < nseg; ++s) {
    EquidistResult seg = equidistribute(eff, bounds[static_cast<size_t>(s)],
                                        bounds[static_cast<size_t>(s) + 1],
                                        count[static_cast<size_t>(s)], opt);
    res.passes_used = std::max(res.passes_used, seg.passes_used);
    res.limiter_used = res.limiter_used || seg.limiter_used;
    res.smoothing_rounds_used =
        std::max(res.smoothing_rounds_used, seg.smoothing_rounds_used);
    const auto& st = seg.grid.t;
    if (pts.empty())
      pts.insert(pts.end(), st.begin(), st.end());
    else
      pts.insert(pts.end(), st.begin() + 1, st.end());
  }
  res.grid = grid_from_points(std::move(pts));
  res.constraints_ok = constraints_ok(res.grid, opt);
  return res;
}

double eta_consistency(const Grid& g, const MeshDensity& psi) {
  const double step = 1e-5 * (g.t_end() - g.t_begin());
  double worst = 0;
  for (int n = 1; n <= g.last_block(); ++n) {
    const double tn = g.t[static_cast<size_t>(n)];
    const double eta = (g.sigma(n) - 1.0) / g.h(n);
    const double dlog =
        (std::log(psi(tn + step)) - std::log(psi(tn - step))) / (2.0 * step);
    worst = std::max(worst, std::abs(eta + dlog));
  }
  return worst;
}

}  // namespace peeropt
