#pragma once

// Empirical checks of the moment inequalities for log-concave and
// beta-regular laws: moment regularity, weak/strong comparison, the tail
// version of it, Sudakov-type minoration and moment growth.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "core.hpp"
#include "ensembles.hpp"
#include "random.hpp"

namespace lpqlab {

inline constexpr std::array<std::string_view, 6> kCheckIds = {
    "regularity", "weakstrong", "tailcmp", "sudakov", "momclaim", "momprofile"};

inline bool is_check_id(std::string_view id) {
  return std::find(kCheckIds.begin(), kCheckIds.end(), id) != kCheckIds.end();
}

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// One moment check. `constant` is always lhs / (sum of terms), so it can be
/// recomputed from the record.
struct MomentReport {
  std::string check_id;
  std::string spec_summary;
  Family family = Family::gaussian;
  Eigen::Index m = 1;
  Eigen::Index n = 1;
  std::vector<NamedValue> params;
  double lhs = 0.0;
  std::vector<Term> terms;
  double constant = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::vector<NamedValue> details;
  std::vector<std::string> flags;

  double rhs() const {
    std::vector<double> v;
    for (const auto& t : terms) v.push_back(t.value);
    return sorted_sum(std::move(v));
  }

  std::optional<double> param(std::string_view name) const {
    for (const auto& p : params) {
      if (p.name == name) return p.value;
    }
    return std::nullopt;
  }

  bool has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }

  void finish(double zero_over_zero = 0.0) {
    const double r = rhs();
    if (r > 0) {
      constant = lhs / r;
    } else {
      constant = lhs > 0 ? std::numeric_limits<double>::infinity() : zero_over_zero;
    }
  }
};

/// (mean |v|^r)^{1/r} over samples, r > 0.
inline double empirical_moment(const std::vector<double>& values, double r) {
  if (values.empty()) return 0.0;
  std::vector<double> powered;
  powered.reserve(values.size());
  for (double v : values) {
    const double a = std::abs(v);
    powered.push_back(r == 1.0 ? a : (r == 2.0 ? a * a : std::pow(a, r)));
  }
  const double mean = sorted_sum(std::move(powered)) / static_cast<double>(values.size());
  return r == 1.0 ? mean : std::pow(mean, 1.0 / r);
}

namespace detail {

inline EnsembleSpec row_spec(Family f, Eigen::Index n) {
  return EnsembleSpec::log_concave(f, CoeffMatrix::ones(1, n));
}

inline std::vector<double> row_norms(const Matrix& rows, double r) {
  std::vector<double> out(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index s = 0; s < rows.rows(); ++s) {
    const Vector row = rows.row(s).transpose();
    out[static_cast<std::size_t>(s)] =
        lp_norm_unchecked(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), r);
  }
  return out;
}

inline MomentReport start_report(std::string_view id, const EnsembleSpec& spec, std::size_t trials,
                                 std::uint64_t seed) {
  MomentReport rep;
  rep.check_id = std::string(id);
  rep.spec_summary = spec.summary();
  rep.family = spec.family;
  rep.m = spec.m();
  rep.n = spec.n();
  rep.trials = trials;
  rep.seed = seed;
  return rep;
}

}  // namespace detail

/// C1_hat = (E f^p)^{1/p} / ((p/q) (E f^q)^{1/q}) with f = ||row||_{norm_p}.
inline MomentReport regularity_constant(const EnsembleSpec& spec, double norm_p, double p, double q,
                                        std::size_t trials, std::uint64_t seed,
                                        unsigned threads = 0) {
  if (!(q >= 1.0)) throw DomainError("regularity_constant: q must be >= 1");
  if (p < q) throw DomainError("regularity_constant: requires p >= q");
  detail::require_exponent(norm_p, "regularity_constant");
  if (trials < 2) throw DomainError("regularity_constant: need at least 2 draws");
  const Matrix rows = detail::sample_unit_rows(spec, trials, seed, threads);
  const auto f = detail::row_norms(rows, norm_p);
  MomentReport rep = detail::start_report("regularity", spec, trials, seed);
  rep.params = {{"norm_p", norm_p}, {"p", p}, {"q", q}};
  rep.lhs = empirical_moment(f, p);
  const double rhs = empirical_moment(f, q);
  rep.terms = {{"scaled_rhs", (p / q) * rhs}};
  rep.details = {{"moment_q", rhs}};
  rep.finish();
  return rep;
}

/// C_hat = (E||Z||_p^q)^{1/q} / (p (E||Z||_p + sigma_{p,Z}(q))).
inline MomentReport weak_strong_constant(const EnsembleSpec& spec, double p, double q,
                                         std::size_t trials, std::size_t restarts,
                                         std::uint64_t seed, WeakMomentOptions opts = {}) {
  if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("weak_strong_constant: p, q must be >= 1");
  if (trials < 2) throw DomainError("weak_strong_constant: need at least 2 draws");
  opts.restarts = restarts;
  const Matrix rows = detail::sample_unit_rows(spec, trials, seed, opts.threads);
  const auto norms = detail::row_norms(rows, p);
  const double strong = empirical_moment(norms, q);
  const double mean_norm = empirical_moment(norms, 1.0);
  // Same seed, so sigma is computed on the very same draws.
  const WeakMomentEstimate sigma = weak_moment_sigma(spec, true, p, q, trials, seed, opts);
  MomentReport rep = detail::start_report("weakstrong", spec, trials, seed);
  rep.params = {{"p", p}, {"q", q}};
  rep.lhs = strong;
  rep.terms = {{"p_mean_norm", p * mean_norm}, {"p_sigma", p * sigma.value}};
  rep.details = {{"mean_norm", mean_norm}, {"sigma", sigma.value}};
  rep.finish();
  return rep;
}

struct TailPoint {
  double u = 0.0;
  /// P(||Z||_p >= p (u + E||Z||_p)), i.e. the left side at unit constant.
  double lhs_unit = 0.0;
  /// max over candidate directions of P(|<t, Z>| >= u).
  double rhs_sup = 0.0;
  /// Index into the candidate set (basis vectors first) attaining rhs_sup.
  std::size_t direction = 0;
  /// Smallest constant making the tail inequality hold at this u.
  double constant = 0.0;
  bool resolved = false;
};

struct TailComparison {
  MomentReport report;
  std::vector<TailPoint> points;
};

/// Smallest C3 with P(||Z||_p >= C3 p (u + E||Z||_p)) <= C4 sup_t P(|<t,Z>| >= u)
/// across `u_grid`; the sup runs over every e_j plus `random_directions`
/// random points of the l_{p'} sphere. Points whose right side is below
/// 10/T are flagged unresolved and skipped.
inline TailComparison tail_comparison(const EnsembleSpec& spec, double p,
                                      const std::vector<double>& u_grid, double c4,
                                      std::size_t trials, std::uint64_t seed,
                                      std::size_t random_directions = 64, unsigned threads = 0) {
  if (!(p >= 1.0)) throw DomainError("tail_comparison: p must be >= 1");
  if (!(c4 >= 1.0)) throw DomainError("tail_comparison: C4 must be >= 1");
  if (u_grid.empty()) throw DomainError("tail_comparison: empty u grid");
  for (double u : u_grid) {
    if (!(u > 0.0)) throw DomainError("tail_comparison: u grid must be positive");
  }
  if (trials < 2) throw DomainError("tail_comparison: need at least 2 draws");

  const Matrix rows = detail::sample_unit_rows(spec, trials, seed, threads);
  auto norms = detail::row_norms(rows, p);
  const double mean_norm = empirical_moment(norms, 1.0);
  std::vector<double> desc = norms;
  std::sort(desc.begin(), desc.end(), std::greater<>());
  const double dt = static_cast<double>(trials);

  Stream rng = detail::start_stream(seed);
  auto dirs = sphere_starts(spec.n(), holder_conjugate(p), random_directions, rng);
  // sphere_starts includes the ones vector; it is a legitimate candidate too.

  std::vector<TailPoint> points(u_grid.size());
  for (std::size_t k = 0; k < u_grid.size(); ++k) {
    points[k].u = u_grid[k];
    const double thr = p * (u_grid[k] + mean_norm);
    points[k].lhs_unit =
        static_cast<double>(std::count_if(norms.begin(), norms.end(), [&](double s) { return s >= thr; })) / dt;
  }
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    const Vector proj = (rows * dirs[d]).cwiseAbs();
    for (auto& pt : points) {
      const double frac =
          static_cast<double>((proj.array() >= pt.u).count()) / dt;
      if (frac > pt.rhs_sup) {
        pt.rhs_sup = frac;
        pt.direction = d;
      }
    }
  }

  MomentReport rep = detail::start_report("tailcmp", spec, trials, seed);
  rep.params = {{"p", p}, {"c4", c4}};
  double c3 = 0.0;
  bool any = false;
  for (auto& pt : points) {
    pt.resolved = pt.rhs_sup >= 10.0 / dt;
    if (!pt.resolved) {
      rep.flags.push_back("unresolved_u=" + std::to_string(pt.u));
      continue;
    }
    any = true;
    const auto allowed = static_cast<std::size_t>(std::floor(c4 * pt.rhs_sup * dt));
    pt.constant = allowed >= trials ? 0.0 : desc[allowed] / (p * (pt.u + mean_norm));
    c3 = std::max(c3, pt.constant);
  }
  if (!any) rep.flags.push_back("no_resolved_points");
  rep.lhs = c3;
  rep.terms = {{"unit", 1.0}};
  rep.details.push_back({"mean_norm", mean_norm});
  for (const auto& pt : points) {
    rep.details.push_back({"rhs_sup@" + std::to_string(pt.u), pt.rhs_sup});
    rep.details.push_back({"lhs_unit@" + std::to_string(pt.u), pt.lhs_unit});
  }
  rep.finish();
  return {std::move(rep), std::move(points)};
}

/// E max_i |a_i Z_i| against max_k a*_k min_i ||Z_i||_{log(k+1)} for an
/// isotropic vector Z in R^m of the given family. The constant is LHS/RHS;
/// a = 0 gives 1 by convention.
inline MomentReport sudakov_ratio(const std::vector<double>& a, Family family, std::size_t trials,
                                  std::uint64_t seed, unsigned threads = 0) {
  if (a.empty()) throw DomainError("sudakov_ratio: a must have length >= 1");
  if (trials < 2) throw DomainError("sudakov_ratio: need at least 2 draws");
  const auto m = static_cast<Eigen::Index>(a.size());
  const EnsembleSpec spec = detail::row_spec(family, m);
  const Matrix z = detail::sample_unit_rows(spec, trials, seed, threads);

  std::vector<double> maxima(trials);
  for (std::size_t s = 0; s < trials; ++s) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      best = std::max(best, std::abs(a[static_cast<std::size_t>(i)] * z(static_cast<Eigen::Index>(s), i)));
    }
    maxima[s] = best;
  }
  const double lhs = empirical_moment(maxima, 1.0);

  const auto sorted = nonincreasing_rearrangement(a);
  const Matrix logs = z.cwiseAbs().array().log().matrix();
  double rhs = 0.0;
  double phi_at = 0.0;
  std::size_t argmax_k = 0;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    const double ak = sorted[k - 1];
    if (ak == 0.0) break;
    // Empirical moments grow with the order, so within a run of equal a*_k
    // only the last k can attain the max.
    if (k < sorted.size() && sorted[k] == ak) continue;
    const double order = std::log(static_cast<double>(k + 1));
    double min_moment = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<double> powered(trials);
      for (std::size_t s = 0; s < trials; ++s) {
        powered[s] = std::exp(order * logs(static_cast<Eigen::Index>(s), i));
      }
      const double mom = std::pow(sorted_sum(std::move(powered)) / static_cast<double>(trials), 1.0 / order);
      min_moment = std::min(min_moment, mom);
    }
    if (ak * min_moment > rhs) {
      rhs = ak * min_moment;
      argmax_k = k;
      phi_at = order * min_moment;
    }
  }

  MomentReport rep = detail::start_report("sudakov", spec, trials, seed);
  rep.m = m;
  rep.n = 1;
  rep.params = {{"m", static_cast<double>(m)}};
  rep.lhs = lhs;
  rep.terms = {{"rhs", rhs}};
  rep.details = {{"argmax_k", static_cast<double>(argmax_k)}, {"phi_at_argmax", phi_at}};
  rep.finish(1.0);
  return rep;
}

/// max over r of (E|sum_j t_j Y_j|^r)^{1/r} / (r^beta ||t||_2) for
/// beta-regular Y; reported as constant = that max / L.
inline MomentReport moment_comparison_claim(double beta, double L, const std::vector<double>& t,
                                            const std::vector<double>& r_grid, std::size_t trials,
                                            std::uint64_t seed, unsigned threads = 0) {
  if (t.empty()) throw DomainError("moment_comparison_claim: empty t");
  if (r_grid.empty()) throw DomainError("moment_comparison_claim: empty r grid");
  for (double r : r_grid) {
    if (!(r >= 2.0 && r <= 32.0)) throw DomainError("moment_comparison_claim: r must lie in [2, 32]");
  }
  if (trials < 2) throw DomainError("moment_comparison_claim: need at least 2 draws");
  const auto n = static_cast<Eigen::Index>(t.size());
  const EnsembleSpec spec = EnsembleSpec::beta_regular(CoeffMatrix::ones(1, n), beta, L);
  const Vector tv = Eigen::Map<const Vector>(t.data(), n);
  const double t2 = tv.norm();

  MomentReport rep = detail::start_report("momclaim", spec, trials, seed);
  rep.params = {{"beta", beta}, {"L", L}};
  if (beta > 1.0) rep.flags.push_back("out_of_claim");
  double cl = 0.0;
  if (t2 > 0.0) {
    const Matrix rows = detail::sample_unit_rows(spec, trials, seed, threads);
    const Vector sums = rows * tv;
    const std::vector<double> sv(sums.data(), sums.data() + sums.size());
    for (double r : r_grid) {
      const double ratio = empirical_moment(sv, r) / (std::pow(r, beta) * t2);
      rep.details.push_back({"ratio@r=" + std::to_string(r), ratio});
      cl = std::max(cl, ratio);
    }
  }
  rep.lhs = cl;
  rep.terms = {{"L", L}};
  rep.finish();
  return rep;
}

/// Natural moment growth exponent of a family, when it has one.
inline std::optional<double> natural_beta(const EnsembleSpec& spec) {
  switch (spec.family) {
    case Family::gaussian: return 0.5;
    case Family::laplace: return 1.0;
    case Family::beta_regular: return spec.beta;
    default: return std::nullopt;
  }
}

struct MomentProfile {
  MomentReport report;
  std::vector<double> r_grid;
  /// (E|Y_1|^r)^{1/r} per grid point.
  std::vector<double> moments;
  /// Smallest L with r^beta / L <= moment_r <= L r^beta on the grid; empty
  /// when no beta applies.
  std::optional<double> l_hat;
};

/// Moment profile of the first coordinate of a coefficient-free row.
inline MomentProfile moment_growth_profile(const EnsembleSpec& spec, const std::vector<double>& r_grid,
                                           std::size_t trials, std::uint64_t seed,
                                           std::optional<double> beta = std::nullopt,
                                           unsigned threads = 0) {
  if (r_grid.empty()) throw DomainError("moment_growth_profile: empty r grid");
  for (double r : r_grid) {
    if (!(r >= 1.0 && r <= 64.0)) throw DomainError("moment_growth_profile: r must lie in [1, 64]");
  }
  if (trials < 2) throw DomainError("moment_growth_profile: need at least 2 draws");
  if (!beta) beta = natural_beta(spec);
  const Matrix rows = detail::sample_unit_rows(spec, trials, seed, threads);
  const Vector first = rows.col(0);
  const std::vector<double> coord(first.data(), first.data() + first.size());

  MomentProfile prof;
  prof.r_grid = r_grid;
  prof.report = detail::start_report("momprofile", spec, trials, seed);
  double l_hat = 1.0;
  for (double r : r_grid) {
    const double mom = empirical_moment(coord, r);
    prof.moments.push_back(mom);
    prof.report.details.push_back({"moment@r=" + std::to_string(r), mom});
    if (beta) {
      const double scale = std::pow(r, *beta);
      l_hat = std::max({l_hat, mom / scale, scale / mom});
    }
  }
  if (beta) {
    prof.l_hat = l_hat;
    prof.report.params = {{"beta", *beta}};
    prof.report.lhs = l_hat;
  } else {
    prof.report.flags.push_back("no_beta");
    prof.report.lhs = std::numeric_limits<double>::quiet_NaN();
  }
  prof.report.terms = {{"unit", 1.0}};
  prof.report.finish();
  return prof;
}

}  // namespace lpqlab
