#pragma once

// Maximization of a convex, even objective over the unit sphere of l_{p'}.
//
// For convex F the linearization step u+ = argmax_{||v||_{p'} <= 1} <grad F(u), v>
// never decreases F, and the argmax has the closed form Phi_p(g)/||g||_p^{p-1}
// with Phi_p(g) = sign(g)|g|^{p-1}. Both the operator-norm engine and the
// weak-moment estimators are instances of this loop.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "core.hpp"

namespace lpqlab {

struct AscentOptions {
  int max_iter = 10000;
  /// Stop when the relative gain of one step falls below this.
  double tol = 1e-10;
  /// When there are more starts than `refine`, every start first runs this
  /// many steps and only the best `refine` continue to convergence.
  int probe_iters = 2;
  std::size_t refine = 16;
};

struct AscentResult {
  double value = 0.0;
  Vector point;
  std::size_t start_index = 0;
  int iterations = 0;
  bool converged = false;
};

/// Signed power sign(x)|x|^{r-1} applied entrywise after scaling by the max
/// magnitude (the scale is irrelevant to every caller). r == 1 gives sign(x).
inline Vector signed_power(const Vector& x, double r) {
  Vector out(x.size());
  const double scale = x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Vector::Zero(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x(k);
    if (v == 0.0) {
      out(k) = 0.0;
    } else if (r == 1.0) {
      out(k) = v > 0 ? 1.0 : -1.0;
    } else if (r == 2.0) {
      out(k) = v / scale;
    } else {
      const double mag = std::pow(std::abs(v) / scale, r - 1.0);
      out(k) = v > 0 ? mag : -mag;
    }
  }
  return out;
}

/// Scales x onto the unit sphere of l_r (x must be nonzero).
inline Vector normalize_in(const Vector& x, double r) {
  const double nrm = detail::lp_norm_unchecked(
      std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), r);
  return x / nrm;
}

/// Starting points: every basis vector, the normalized all-ones vector, then
/// `random_count` random points of the l_{p'} sphere.
template <typename Rng>
std::vector<Vector> sphere_starts(Eigen::Index n, double p_conj, std::size_t random_count, Rng& rng) {
  std::vector<Vector> starts;
  starts.reserve(static_cast<std::size_t>(n) + 1 + random_count);
  for (Eigen::Index j = 0; j < n; ++j) starts.push_back(Vector::Unit(n, j));
  starts.push_back(normalize_in(Vector::Ones(n), p_conj));
  for (std::size_t k = 0; k < random_count; ++k) {
    Vector v(n);
    do {
      if (std::isinf(p_conj)) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Eigen::Index j = 0; j < n; ++j) v(j) = u(rng);
      } else {
        // Density proportional to exp(-|x|^{p'}) projects to the cone
        // measure of the l_{p'} sphere.
        std::gamma_distribution<double> gam(1.0 / p_conj, 1.0);
        for (Eigen::Index j = 0; j < n; ++j) {
          const double mag = std::pow(gam(rng), 1.0 / p_conj);
          v(j) = (rng() >> 63) != 0 ? mag : -mag;
        }
      }
    } while (v.cwiseAbs().maxCoeff() == 0.0);
    starts.push_back(normalize_in(v, p_conj));
  }
  return starts;
}

namespace detail {

// State of one ascent run. Objective must provide
//   Evaluation evaluate(const Vector& u) const
// with members `value` (the objective) and `gradient` (any positive multiple
// of the gradient).
template <typename Objective>
class AscentRun {
 public:
  using Evaluation = decltype(std::declval<const Objective&>().evaluate(Vector{}));

  AscentRun(const Objective& obj, Vector start, double p, std::vector<double>* trace)
      : obj_(&obj), p_(p), p_conj_(holder_conjugate(p)), u_(std::move(start)), trace_(trace) {
    eval_ = obj_->evaluate(u_);
    if (trace_) trace_->push_back(eval_.value);
  }

  // Runs up to `steps` more iterations; returns true once finished.
  bool advance(int steps, double tol) {
    for (int s = 0; s < steps && !done_; ++s) {
      if (eval_.value == 0.0 || eval_.gradient.cwiseAbs().maxCoeff() == 0.0) {
        done_ = true;
        converged_ = true;
        break;
      }
      Vector next = normalize_in(signed_power(eval_.gradient, p_), p_conj_);
      auto next_eval = obj_->evaluate(next);
      ++iterations_;
      if (trace_) trace_->push_back(next_eval.value);
      if (!(next_eval.value >= eval_.value)) {
        // Rounding-level stagnation at a fixed point; keep the better point.
        done_ = true;
        converged_ = true;
        break;
      }
      const double gain = (next_eval.value - eval_.value) / eval_.value;
      u_ = std::move(next);
      eval_ = std::move(next_eval);
      if (gain < tol) {
        done_ = true;
        converged_ = true;
      }
    }
    return done_;
  }

  double value() const { return eval_.value; }
  const Vector& point() const { return u_; }
  int iterations() const { return iterations_; }
  bool done() const { return done_; }
  bool converged() const { return converged_; }

 private:
  const Objective* obj_;
  double p_;
  double p_conj_;
  Vector u_;
  Evaluation eval_;
  std::vector<double>* trace_;
  int iterations_ = 0;
  bool done_ = false;
  bool converged_ = false;
};

}  // namespace detail

/// Runs the ascent from every start and returns the best endpoint. Ties keep
/// the earliest start. `p` is the exponent whose conjugate defines the sphere.
template <typename Objective>
AscentResult maximize_on_sphere(const Objective& obj, const std::vector<Vector>& starts, double p,
                                const AscentOptions& opts, std::vector<double>* trace = nullptr) {
  if (starts.empty()) throw DomainError("maximize_on_sphere: no starting points");
  std::vector<detail::AscentRun<Objective>> runs;
  runs.reserve(starts.size());
  for (const Vector& s : starts) {
    runs.emplace_back(obj, s, p, starts.size() == 1 ? trace : nullptr);
  }

  std::vector<std::size_t> order(runs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (runs.size() > opts.refine) {
    for (auto& r : runs) r.advance(opts.probe_iters, opts.tol);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return runs[a].value() > runs[b].value();
    });
    order.resize(opts.refine);
  }
  for (std::size_t idx : order) runs[idx].advance(opts.max_iter - runs[idx].iterations(), opts.tol);

  AscentResult best;
  best.value = -1.0;
  int total_iterations = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    total_iterations += runs[k].iterations();
    if (runs[k].value() > best.value) {
      best.value = runs[k].value();
      best.point = runs[k].point();
      best.start_index = k;
      best.converged = runs[k].converged();
    }
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace lpqlab
