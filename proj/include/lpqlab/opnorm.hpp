#pragma once

// Operator norm ||X||_{p'->q} = sup{ ||Xu||_q : ||u||_{p'} <= 1 }.
//
// For p' <= 2 <= q the problem is NP-hard in general, so the engine returns
// a certified lower bound (a witness u with ||u||_{p'} = 1) together with
// an analytic upper bound. Restarts close the gap in practice.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ascent.hpp"
#include "core.hpp"
#include "ensembles.hpp"
#include "random.hpp"

namespace lpqlab {

struct NormEstimate {
  /// ||X * witness||_q, certified.
  double lower = 0.0;
  /// min of the row and column relaxations.
  double upper = 0.0;
  Vector witness;
  int restarts_used = 0;
  int iterations = 0;
  bool converged = false;
};

struct PowerOptions {
  /// Random sphere starts, on top of the n basis vectors and the ones vector.
  std::size_t restarts = 8;
  int max_iter = 10000;
  double tol = 1e-10;
  int probe_iters = 2;
  std::size_t refine = 16;
  /// Seed for the random starts when no stream is supplied.
  std::uint64_t seed = 0;

  AscentOptions ascent() const { return {max_iter, tol, probe_iters, refine}; }
};

/// min( (sum_i ||X_i||_p^q)^{1/q}, (sum_j ||X^(j)||_q^p)^{1/p} ).
inline double upper_bound(const Matrix& x, const PQParams& pq) {
  if (x.size() == 0) return 0.0;
  std::vector<double> row_norms(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector r = x.row(i).transpose();
    row_norms[static_cast<std::size_t>(i)] = lp_norm(r, pq.p());
  }
  std::vector<double> col_norms(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Vector c = x.col(j);
    col_norms[static_cast<std::size_t>(j)] = lp_norm(c, pq.q());
  }
  const double by_rows = lp_norm(std::span<const double>(row_norms), pq.q());
  const double by_cols = lp_norm(std::span<const double>(col_norms), pq.p());
  return std::min(by_rows, by_cols);
}

namespace detail {

// u -> ||Xu||_q with gradient direction X^T Phi_q(Xu).
struct OpNormObjective {
  const Matrix* x;
  double q;

  struct Evaluation {
    double value = 0.0;
    Vector gradient;
  };

  Evaluation evaluate(const Vector& u) const {
    const Vector y = (*x) * u;
    Evaluation e;
    e.value = lp_norm_unchecked(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())), q);
    e.gradient = x->transpose() * signed_power(y, q);
    return e;
  }
};

}  // namespace detail

/// Multi-start alternating dual ascent: y = Xu, v = Phi_q(y), w = X^T v,
/// u <- Phi_p(w) normalized in l_{p'}. Starts are every e_j, the ones
/// vector and `opts.restarts` random sphere points; the best endpoint wins.
template <typename Rng>
NormEstimate power_iterate_lower(const Matrix& x, const PQParams& pq, const PowerOptions& opts,
                                 Rng& rng, std::vector<double>* trace = nullptr) {
  if (x.rows() < 1 || x.cols() < 1) throw DomainError("power_iterate_lower: empty matrix");
  if (!x.allFinite()) throw DomainError("power_iterate_lower: non-finite input");
  const Eigen::Index n = x.cols();
  NormEstimate est;
  est.upper = upper_bound(x, pq);
  if (x.cwiseAbs().maxCoeff() == 0.0) {
    est.witness = Vector::Unit(n, 0);
    est.converged = true;
    return est;
  }
  const auto starts = sphere_starts(n, pq.p_conj(), opts.restarts, rng);
  const detail::OpNormObjective obj{&x, pq.q()};
  const AscentResult best = maximize_on_sphere(obj, starts, pq.p(), opts.ascent(), trace);

  est.witness = normalize_in(best.point, pq.p_conj());
  const Vector image = x * est.witness;
  est.lower = lp_norm(image, pq.q());
  est.restarts_used = static_cast<int>(starts.size());
  est.iterations = best.iterations;
  est.converged = best.converged;
  if (est.lower > est.upper) {
    if (est.lower > est.upper * (1.0 + 1e-9)) {
      throw std::logic_error("power_iterate_lower: lower bound exceeds relaxation");
    }
    est.upper = est.lower;  // rounding when the relaxation is exact
  }
  return est;
}

inline NormEstimate power_iterate_lower(const Matrix& x, const PQParams& pq,
                                        const PowerOptions& opts = {},
                                        std::vector<double>* trace = nullptr) {
  Stream rng = derive_substream(opts.seed, 0);
  return power_iterate_lower(x, pq, opts, rng, trace);
}

/// Runs the ascent from one start only; used to observe the objective trace.
inline NormEstimate power_iterate_from(const Matrix& x, const PQParams& pq, const Vector& start,
                                       const PowerOptions& opts, std::vector<double>* trace) {
  NormEstimate est;
  est.upper = upper_bound(x, pq);
  const detail::OpNormObjective obj{&x, pq.q()};
  const AscentResult r =
      maximize_on_sphere(obj, {normalize_in(start, pq.p_conj())}, pq.p(), opts.ascent(), trace);
  est.witness = r.point;
  est.lower = lp_norm(Vector(x * r.point), pq.q());
  est.restarts_used = 1;
  est.iterations = r.iterations;
  est.converged = r.converged;
  return est;
}

/// Largest singular value by power iteration on X^T X.
inline double spectral_norm(const Matrix& x, double tol = 1e-12, int max_iter = 1000000) {
  if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Eigen::Index n = x.cols();
  // Leading column of X^T, nudged off any degenerate subspace.
  Vector v = x.row(0).transpose();
  const double scale = std::max(v.norm(), x.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    v(j) += 1e-3 * scale * static_cast<double>(j + 1) / static_cast<double>(n);
  }
  v.normalize();
  double sigma = (x * v).norm();
  for (int it = 0; it < max_iter; ++it) {
    Vector w = x.transpose() * (x * v);
    const double wn = w.norm();
    if (wn == 0.0) break;
    v = w / wn;
    const double next = (x * v).norm();
    const bool done = std::abs(next - sigma) <= tol * next;
    sigma = next;
    if (done) break;
  }
  return sigma;
}

namespace detail {

// Unit Euclidean vector from n-1 hyperspherical angles.
inline Vector from_angles(const std::vector<double>& angles) {
  const auto n = static_cast<Eigen::Index>(angles.size() + 1);
  Vector s(n);
  double prod = 1.0;
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    s(k) = prod * std::cos(angles[static_cast<std::size_t>(k)]);
    prod *= std::sin(angles[static_cast<std::size_t>(k)]);
  }
  s(n - 1) = prod;
  return s;
}

}  // namespace detail

/// Grid search over the l_{p'} sphere (radially projected hyperspherical
/// grid, `grid_density` points per angle, one hemisphere) followed by
/// coordinate ascent in angle space from the best grid points. n <= 4.
inline double brute_oracle_small(const Matrix& x, const PQParams& pq, int grid_density = 64) {
  const Eigen::Index n = x.cols();
  if (n > 4) throw DomainError("brute_oracle_small: n must be <= 4");
  if (n < 1 || x.rows() < 1) throw DomainError("brute_oracle_small: empty matrix");
  if (grid_density < 2) throw DomainError("brute_oracle_small: grid_density must be >= 2");
  if (n == 1) return lp_norm(Vector(x.col(0)), pq.q());

  const auto dims = static_cast<std::size_t>(n - 1);
  const double pi = std::numbers::pi;
  auto value_at = [&](const std::vector<double>& angles) {
    const Vector u = normalize_in(detail::from_angles(angles), pq.p_conj());
    return lp_norm(Vector(x * u), pq.q());
  };

  // Polar angles cover [0, pi] inclusive; the azimuth covers [0, pi) since
  // u and -u give the same value.
  std::vector<std::pair<double, std::vector<double>>> grid;
  std::vector<int> idx(dims, 0);
  for (;;) {
    std::vector<double> angles(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      angles[k] = k + 1 < dims ? pi * idx[k] / (grid_density - 1) : pi * idx[k] / grid_density;
    }
    grid.emplace_back(value_at(angles), angles);
    std::size_t k = 0;
    while (k < dims) {
      if (++idx[k] < grid_density) break;
      idx[k] = 0;
      ++k;
    }
    if (k == dims) break;
  }
  const std::size_t keep = std::min<std::size_t>(8, grid.size());
  std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(keep), grid.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  double best = grid.front().first;
  for (std::size_t g = 0; g < keep; ++g) {
    auto [val, angles] = grid[g];
    double h = pi / grid_density;
    int guard = 0;
    while (h > 1e-13 && guard++ < 100000) {
      bool improved = false;
      for (std::size_t k = 0; k < dims; ++k) {
        for (double dir : {1.0, -1.0}) {
          auto trial = angles;
          trial[k] += dir * h;
          const double v = value_at(trial);
          if (v > val) {
            val = v;
            angles = std::move(trial);
            improved = true;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    best = std::max(best, val);
  }
  return best;
}

struct McNormResult {
  double mean = 0.0;
  double se = 0.0;
  double upper_mean = 0.0;
  double upper_se = 0.0;
  /// Per-trial certified lower bounds, in trial order.
  std::vector<double> lowers;
};

struct McOptions {
  PowerOptions power;
  unsigned threads = 0;
};

/// Mean and standard error of the certified lower bound over T independent
/// draws; trial t uses derive_substream(seed, t) for both the matrix and the
/// random starts.
inline McNormResult mc_expected_opnorm(const EnsembleSpec& spec, const PQParams& pq,
                                       std::size_t trials, std::uint64_t seed,
                                       const McOptions& opts = {}) {
  if (trials < 2) throw DomainError("mc_expected_opnorm: need at least 2 trials");
  struct Pair {
    double lower = 0.0;
    double upper = 0.0;
  };
  const auto per_trial = parallel_trials(trials, opts.threads, [&](std::size_t t) {
    Stream rng = derive_substream(seed, t);
    const Matrix x = sample_structured_matrix(spec, rng);
    const NormEstimate est = power_iterate_lower(x, pq, opts.power, rng);
    return Pair{est.lower, est.upper};
  });
  McNormResult res;
  std::vector<double> uppers;
  for (const auto& pr : per_trial) {
    res.lowers.push_back(pr.lower);
    uppers.push_back(pr.upper);
  }
  const MeanSe lo = mean_se(res.lowers);
  const MeanSe up = mean_se(uppers);
  res.mean = lo.mean;
  res.se = lo.se;
  res.upper_mean = up.mean;
  res.upper_se = up.se;
  return res;
}

}  // namespace lpqlab
