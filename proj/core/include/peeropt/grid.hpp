#pragma once

#include <array>
#include <vector>

#include "peeropt/types.hpp"

namespace peeropt {

/// Time grid for a two-step run: block boundaries t_0 < t_1 < ... < t_{N+1}.
/// Block n integrates the slab [t_n, t_{n+1}] with stepsize h_n; there are
/// N+1 blocks (the starting block, N-1 interior blocks, the terminal block).
struct Grid {
  std::vector<double> t;

  int nsteps() const { return static_cast<int>(t.size()) - 1; }
  int last_block() const { return static_cast<int>(t.size()) - 2; }
  double h(int n) const { return t[static_cast<size_t>(n) + 1] - t[static_cast<size_t>(n)]; }
  double sigma(int n) const { return h(n) / h(n - 1); }
  double t_begin() const { return t.front(); }
  double t_end() const { return t.back(); }

  /// Stage time of stage i (node c in [0,1]) in block n.
  double stage_time(int n, double c) const { return t[static_cast<size_t>(n)] + c * h(n); }

  /// Smallest and largest stepsize ratio sigma_n, n = 1..N.
  std::array<double, 2> sigma_range() const;

  /// Largest |sigma_n - 1| / h_n, the smooth-grid deviation measure.
  double max_eta() const;
};

/// Uniform grid with the given number of steps (blocks).
Grid uniform_grid(double t0, double t1, int nsteps);

/// Validates strict monotonicity and size >= 2; throws std::invalid_argument.
Grid grid_from_points(std::vector<double> pts);

/// Time-reversed grid on the same interval: t'_n = t_0 + t_{N+1} - t_{N+1-n}.
Grid flipped(const Grid& g);

}  // namespace peeropt
