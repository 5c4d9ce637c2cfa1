#pragma once

// Right-hand sides of the operator-norm inequalities and their Monte Carlo
// verification. Constants are never assigned: every report exposes the raw
// ratio LHS / RHS.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ascent.hpp"
#include "core.hpp"
#include "ensembles.hpp"
#include "opnorm.hpp"
#include "random.hpp"

namespace lpqlab {

inline constexpr std::array<std::string_view, 9> kInequalityIds = {
    "main11", "reverse12", "cor13", "prop15", "uncond16", "lemma31", "lemma32", "mixture42", "beta52"};

inline bool is_inequality_id(std::string_view id) {
  return std::find(kInequalityIds.begin(), kInequalityIds.end(), id) != kInequalityIds.end();
}

struct Term {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string inequality_id;
  std::string spec_summary;
  Family family = Family::gaussian;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  double p = 0.0;
  double q = 0.0;
  std::optional<double> gamma;
  std::optional<double> beta;
  std::optional<double> L;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double lhs_mean = 0.0;
  double lhs_se = 0.0;
  std::vector<Term> terms;
  double rhs_bracket = 0.0;
  double ratio = 0.0;
  /// reverse12 only: lhs / max single term.
  std::optional<double> reverse_ratio;
  /// reverse12 only: same ratio with the relaxation upper bound as LHS.
  std::optional<double> reverse_ratio_upper;
  /// reverse12 only: reverse_ratio >= configured floor.
  std::optional<bool> reverse_ok;
  /// Mean relaxation upper bound when the LHS is an operator norm.
  std::optional<double> upper_mean;
  std::int64_t runtime_ms = 0;
};

/// (lhs + 2 se) / rhs: the unfavorable side for an upper-bound check.
inline double conservative_ratio(const BoundReport& r) {
  return r.rhs_bracket > 0 ? (r.lhs_mean + 2.0 * r.lhs_se) / r.rhs_bracket
                           : std::numeric_limits<double>::quiet_NaN();
}

/// (lhs - 2 se) / max term: the unfavorable side for the reverse check.
inline double conservative_reverse_ratio(const BoundReport& r) {
  double biggest = 0.0;
  for (const auto& t : r.terms) biggest = std::max(biggest, t.value);
  return biggest > 0 ? (r.lhs_mean - 2.0 * r.lhs_se) / biggest
                     : std::numeric_limits<double>::quiet_NaN();
}

/// Monte Carlo mean and SE of max_ij |X_ij|; trial t draws from
/// derive_substream(seed, t).
inline MeanSe estimate_max_entry(const EnsembleSpec& spec, std::size_t trials, std::uint64_t seed,
                                 unsigned threads = 0) {
  if (trials < 2) throw DomainError("estimate_max_entry: need at least 2 trials");
  const auto values = parallel_trials(trials, threads, [&](std::size_t t) {
    Stream rng = derive_substream(seed, t);
    return max_abs_entry(sample_structured_matrix(spec, rng));
  });
  return mean_se(values);
}

// ---------------------------------------------------------------------------
// Weak moments: sup over the l_{p'} ball of empirical moments of <t, row>.

struct WeakMomentEstimate {
  double value = 0.0;
  Vector witness_t;
  std::size_t trials = 0;
  std::size_t restarts = 0;
  /// Delta-method standard error of the objective at the witness.
  double se = 0.0;
};

struct WeakMomentOptions {
  std::size_t restarts = 8;
  AscentOptions ascent{200, 1e-9, 2, 8};
  /// Step sizes of the coordinate refinement, halved from `refine_step`
  /// down to `refine_min_step`.
  double refine_step = 0.1;
  double refine_min_step = 1e-3;
  /// Upper limit on refinement objective evaluations.
  std::size_t refine_max_evals = 400;
  unsigned threads = 0;
};

namespace detail {

// t -> (sum_k w_k mean_s |<C_k o t, Y_s>|^r)^{1/r} for a fixed sample Y
// (T x n) and distinct coefficient rows C_k with multiplicities w_k.
class RowMomentObjective {
 public:
  RowMomentObjective(const Matrix& samples, Matrix coeff_rows, Vector weights, double order)
      : y_(&samples), c_(std::move(coeff_rows)), w_(std::move(weights)), r_(order) {}

  struct Evaluation {
    double value = 0.0;
    Vector gradient;
  };

  // Per-sample contributions sum_k w_k |S_sk|^r.
  Vector per_sample(const Vector& t) const {
    const Matrix s = (*y_) * (c_ * t.asDiagonal()).transpose();
    Vector out = Vector::Zero(s.rows());
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
      for (Eigen::Index i = 0; i < s.rows(); ++i) out(i) += w_(k) * abs_pow(s(i, k));
    }
    return out;
  }

  Evaluation evaluate(const Vector& t) const {
    const Matrix s = (*y_) * (c_ * t.asDiagonal()).transpose();
    Evaluation e;
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(s.size()));
    Matrix phi(s.rows(), s.cols());
    double scale = s.size() == 0 ? 0.0 : s.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
      for (Eigen::Index i = 0; i < s.rows(); ++i) {
        const double v = s(i, k);
        terms.push_back(w_(k) * abs_pow(v));
        if (scale == 0.0 || v == 0.0) {
          phi(i, k) = 0.0;
        } else {
          const double mag = r_ == 2.0 ? std::abs(v) / scale : std::pow(std::abs(v) / scale, r_ - 1.0);
          phi(i, k) = w_(k) * (v > 0 ? mag : -mag);
        }
      }
    }
    const double mean = sorted_sum(std::move(terms)) / static_cast<double>(y_->rows());
    e.value = std::pow(mean, 1.0 / r_);
    const Matrix mcols = y_->transpose() * phi;  // n x k
    e.gradient = (mcols.array() * c_.transpose().array()).rowwise().sum().matrix();
    return e;
  }

  double order() const { return r_; }
  Eigen::Index samples() const { return y_->rows(); }

 private:
  double abs_pow(double v) const {
    const double a = std::abs(v);
    return r_ == 2.0 ? a * a : std::pow(a, r_);
  }

  const Matrix* y_;
  Matrix c_;
  Vector w_;
  double r_;
};

// Distinct rows of `a` (exact equality) with multiplicities, in order of
// first appearance.
inline std::pair<Matrix, Vector> distinct_rows(const Matrix& a) {
  std::vector<Eigen::Index> keep;
  std::vector<double> counts;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    bool found = false;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (a.row(keep[k]) == a.row(i)) {
        counts[k] += 1.0;
        found = true;
        break;
      }
    }
    if (!found) {
      keep.push_back(i);
      counts.push_back(1.0);
    }
  }
  Matrix rows(static_cast<Eigen::Index>(keep.size()), a.cols());
  Vector w(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    rows.row(static_cast<Eigen::Index>(k)) = a.row(keep[k]);
    w(static_cast<Eigen::Index>(k)) = counts[k];
  }
  return {rows, w};
}

// T coefficient-free rows; row s draws from derive_substream(seed, s).
inline Matrix sample_unit_rows(const EnsembleSpec& spec, std::size_t trials, std::uint64_t seed,
                               unsigned threads) {
  const auto rows = parallel_trials(trials, threads, [&](std::size_t s) {
    Stream rng = derive_substream(seed, s);
    return sample_unit_row(spec, rng);
  });
  Matrix y(static_cast<Eigen::Index>(trials), spec.n());
  for (std::size_t s = 0; s < trials; ++s) y.row(static_cast<Eigen::Index>(s)) = rows[s].transpose();
  return y;
}

// Stream for the random starting directions; shared by every weak-moment
// estimator so identical inputs give identical searches.
inline Stream start_stream(std::uint64_t seed) {
  return derive_substream(seed ^ 0xa5a5a5a5a5a5a5a5ULL, 0);
}

inline WeakMomentEstimate maximize_row_moment(const RowMomentObjective& obj, Eigen::Index n, double p,
                                              std::uint64_t seed, const WeakMomentOptions& opts) {
  const double p_conj = holder_conjugate(p);
  Stream rng = start_stream(seed);
  const auto starts = sphere_starts(n, p_conj, opts.restarts, rng);
  const AscentResult best = maximize_on_sphere(obj, starts, p, opts.ascent);

  // Coordinate refinement: t + h e_j, pulled back to the sphere.
  Vector t = best.point;
  double value = best.value;
  std::size_t evals = 0;
  for (double h = opts.refine_step; h >= opts.refine_min_step && evals < opts.refine_max_evals;) {
    bool improved = false;
    for (Eigen::Index j = 0; j < n && evals < opts.refine_max_evals; ++j) {
      for (double dir : {1.0, -1.0}) {
        Vector trial = t;
        trial(j) += dir * h;
        if (trial.cwiseAbs().maxCoeff() == 0.0) continue;
        trial = normalize_in(trial, p_conj);
        const double v = obj.evaluate(trial).value;
        ++evals;
        if (v > value) {
          value = v;
          t = std::move(trial);
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }

  WeakMomentEstimate est;
  est.value = value;
  est.witness_t = t;
  est.trials = static_cast<std::size_t>(obj.samples());
  est.restarts = starts.size();
  const Vector contrib = obj.per_sample(t);
  std::vector<double> cv(contrib.data(), contrib.data() + contrib.size());
  const MeanSe ms = mean_se(cv);
  if (ms.mean > 0) est.se = ms.se * std::pow(ms.mean, 1.0 / obj.order() - 1.0) / obj.order();
  return est;
}

}  // namespace detail

/// sigma_{p,X}(order) = sup_{||t||_{p'} <= 1} (E|<t, Z>|^order)^{1/order},
/// estimated on T common draws of a row. With `row_index_free` the row is the
/// coefficient-free Y_i; otherwise Z = X_i and the result is the max over
/// rows i. `p` is the norm exponent (p >= 1).
inline WeakMomentEstimate weak_moment_sigma(const EnsembleSpec& spec, bool row_index_free, double p,
                                            double moment_order, std::size_t trials,
                                            std::uint64_t seed, const WeakMomentOptions& opts = {}) {
  if (!(moment_order >= 1.0)) throw DomainError("weak_moment_sigma: moment order must be >= 1");
  if (!(p >= 1.0)) throw DomainError("weak_moment_sigma: p must be >= 1");
  if (trials < 2) throw DomainError("weak_moment_sigma: need at least 2 draws");
  const Matrix y = detail::sample_unit_rows(spec, trials, seed, opts.threads);
  const Eigen::Index n = spec.n();
  if (row_index_free) {
    detail::RowMomentObjective obj(y, Matrix::Ones(1, n), Vector::Ones(1), moment_order);
    return detail::maximize_row_moment(obj, n, p, seed, opts);
  }
  const auto [rows, weights] = detail::distinct_rows(spec.coeff.entries());
  WeakMomentEstimate best;
  best.value = -1.0;
  for (Eigen::Index k = 0; k < rows.rows(); ++k) {
    detail::RowMomentObjective obj(y, rows.row(k), Vector::Ones(1), moment_order);
    auto est = detail::maximize_row_moment(obj, n, p, seed, opts);
    if (est.value > best.value) best = std::move(est);
  }
  return best;
}

inline WeakMomentEstimate weak_moment_sigma(const EnsembleSpec& spec, bool row_index_free,
                                            const PQParams& pq, double moment_order,
                                            std::size_t trials, std::uint64_t seed,
                                            const WeakMomentOptions& opts = {}) {
  return weak_moment_sigma(spec, row_index_free, pq.p(), moment_order, trials, seed, opts);
}

/// u = sup_{t in B_{p'}} (sum_i E|<X_i, t>|^q)^{1/q}. All rows share the T
/// draws of Y (the rows are identically distributed).
inline WeakMomentEstimate weak_chaos_u_estimate(const EnsembleSpec& spec, const PQParams& pq,
                                                std::size_t trials, std::uint64_t seed,
                                                const WeakMomentOptions& opts = {}) {
  if (trials < 2) throw DomainError("weak_chaos_u: need at least 2 draws");
  const Matrix y = detail::sample_unit_rows(spec, trials, seed, opts.threads);
  const auto [rows, weights] = detail::distinct_rows(spec.coeff.entries());
  detail::RowMomentObjective obj(y, rows, weights, pq.q());
  return detail::maximize_row_moment(obj, spec.n(), pq.p(), seed, opts);
}

inline double weak_chaos_u(const EnsembleSpec& spec, const PQParams& pq, std::size_t trials,
                           std::uint64_t seed, const WeakMomentOptions& opts = {}) {
  return weak_chaos_u_estimate(spec, pq, trials, seed, opts).value;
}

// ---------------------------------------------------------------------------
// Theorem terms.

/// Expectations estimated by Monte Carlo that enter some right-hand sides.
struct AuxExpectations {
  /// E max_ij |X_ij|
  double max_entry = 0.0;
  /// E max_i ||X_i||_p
  double max_row_norm = 0.0;
  /// E max_j ||X^(j)||_q
  double max_col_norm = 0.0;
};

struct TermContext {
  double gamma = 0.0;
  double beta = 0.5;
  bool improved_exponents = false;
  /// mixture42 with i.i.d. Gaussian Z: the improved exponents halve gamma.
  bool gaussian_z = false;
};

/// Exact term values of the right-hand side of inequality `id`.
inline std::vector<Term> theorem_terms(std::string_view id, const CoeffMatrix& coeff,
                                       const PQParams& pq, const AuxExpectations& aux,
                                       const TermContext& ctx = {}) {
  const Eigen::Index m = coeff.m();
  const Eigen::Index n = coeff.n();
  const double p = pq.p();
  const double q = pq.q();
  if (id == "main11") {
    const double lm = log_dim(m, "main11");
    return {{"row", std::pow(lm, 1.0 / q) * coeff.max_row_norm(p)},
            {"col", coeff.max_col_norm(q)},
            {"entry", std::pow(lm, 1.0 + 1.0 / q) * aux.max_entry}};
  }
  if (id == "reverse12") {
    return {{"row", coeff.max_row_norm(p)}, {"col", coeff.max_col_norm(q)}, {"entry", aux.max_entry}};
  }
  if (id == "cor13") {
    const double lm = log_dim(m, "cor13");
    return {{"row_max", std::pow(lm, 1.0 + 1.0 / q) * aux.max_row_norm},
            {"col_max", aux.max_col_norm}};
  }
  if (id == "prop15") {
    const double lmn = log_dim(std::max(m, n), "prop15");
    return {{"row", p * p * coeff.max_row_norm(p)}, {"entry", p * lmn * aux.max_entry}};
  }
  if (id == "uncond16") {
    const double lm = log_dim(m, "uncond16");
    const double ln = log_dim(n, "uncond16");
    const double row_exp = (ctx.improved_exponents ? 0.5 : 1.5) + 1.0 / q;
    return {{"row_max", std::pow(lm, row_exp) * aux.max_row_norm},
            {"col_max", std::sqrt(ln) * aux.max_col_norm}};
  }
  if (id == "lemma31") {
    const double lm = log_dim(m, "lemma31");
    return {{"row", coeff.max_row_norm(p)}, {"entry", lm * aux.max_entry}};
  }
  if (id == "lemma32") {
    return {{"col", q * coeff.max_col_norm(q)}};
  }
  if (id == "mixture42") {
    const double lm = log_dim(m, "mixture42");
    const double ln = log_dim(n, "mixture42");
    if (ctx.gamma > 0 && (p < 1.0 / ctx.gamma || q < 1.0 / ctx.gamma)) {
      throw DomainError("mixture42: requires p, q >= 1/gamma");
    }
    const double g = (ctx.improved_exponents && ctx.gaussian_z) ? ctx.gamma / 2.0 : ctx.gamma;
    const double entry_exp = ctx.improved_exponents ? 1.0 / q : 1.0 + 1.0 / q;
    return {{"row", std::pow(lm, 1.0 / q + g) * coeff.max_row_norm(p)},
            {"col", std::pow(ln, g) * coeff.max_col_norm(q)},
            {"entry", std::pow(lm, entry_exp) * aux.max_entry}};
  }
  if (id == "beta52") {
    const double lm = log_dim(m, "beta52");
    const double ln = log_dim(n, "beta52");
    const double b = ctx.beta;
    return {{"row", std::pow(lm, b + 1.0 / q) * coeff.max_row_norm(p)},
            {"col", std::pow(ln, b) * coeff.max_col_norm(q)},
            {"entry", std::pow(lm, 1.0 / q) * std::sqrt(std::log(static_cast<double>(m * n))) *
                          aux.max_entry}};
  }
  throw DomainError("unknown inequality id '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------
// Verification.

struct VerifyOptions {
  McOptions mc;
  WeakMomentOptions weak;
  bool improved_exponents = false;
  double reverse_floor = 0.25;
  bool record_runtime = true;
};

namespace detail {

inline void check_compatible(std::string_view id, const EnsembleSpec& spec) {
  const Family f = spec.family;
  auto fail = [&](const char* need) {
    throw DomainError(std::string(id) + " requires " + need + ", got '" +
                      std::string(family_name(f)) + "'");
  };
  if (id == "main11" || id == "reverse12" || id == "cor13" || id == "prop15" || id == "lemma31" ||
      id == "lemma32") {
    if (!is_log_concave(f)) fail("an isotropic log-concave row family");
  } else if (id == "uncond16") {
    if (f != Family::unconditional_wrap && !is_product(f)) {
      fail("unconditional_wrap or a product family");
    }
  } else if (id == "mixture42") {
    if (f != Family::gaussian_mixture) fail("gaussian_mixture");
  } else if (id == "beta52") {
    if (f != Family::beta_regular) fail("beta_regular");
  } else {
    throw DomainError("unknown inequality id '" + std::string(id) + "'");
  }
}

inline bool needs_opnorm(std::string_view id) {
  return id == "main11" || id == "reverse12" || id == "cor13" || id == "uncond16" ||
         id == "mixture42" || id == "beta52";
}

struct TrialStats {
  double lower = 0.0;
  double upper = 0.0;
  double max_entry = 0.0;
  double max_row = 0.0;  // max_i ||X_i||_p
  double max_col = 0.0;  // max_j ||X^(j)||_q
};

}  // namespace detail

/// Estimates the LHS of inequality `id` by Monte Carlo and evaluates its
/// right-hand side terms. For lemma32 `trials` is the number of row draws
/// behind the weak moment; otherwise it is the number of matrices.
inline BoundReport verify_inequality(std::string_view id, const EnsembleSpec& spec,
                                     const PQParams& pq, std::size_t trials, std::uint64_t seed,
                                     const VerifyOptions& opts = {}) {
  const auto started = std::chrono::steady_clock::now();
  detail::check_compatible(id, spec);
  spec.validate();
  if (trials < 2) throw DomainError("verify_inequality: need at least 2 trials");
  if (id != "reverse12" && id != "lemma32") log_dim(spec.m(), std::string(id).c_str());

  BoundReport rep;
  rep.inequality_id = std::string(id);
  rep.spec_summary = spec.summary();
  rep.family = spec.family;
  rep.m = spec.m();
  rep.n = spec.n();
  rep.p = pq.p();
  rep.q = pq.q();
  rep.trials = trials;
  rep.seed = seed;
  TermContext ctx;
  ctx.improved_exponents = opts.improved_exponents;
  if (spec.family == Family::gaussian_mixture) {
    rep.gamma = spec.gamma;
    ctx.gamma = spec.gamma;
    ctx.gaussian_z = spec.mixture_base == Family::gaussian;
  }
  if (spec.family == Family::beta_regular) {
    rep.beta = spec.beta;
    rep.L = spec.L;
    ctx.beta = spec.beta;
  }

  AuxExpectations aux;
  if (id == "lemma32") {
    const auto est = weak_chaos_u_estimate(spec, pq, trials, seed, opts.weak);
    rep.lhs_mean = est.value;
    rep.lhs_se = est.se;
  } else {
    const bool opnorm = detail::needs_opnorm(id);
    const auto stats = parallel_trials(trials, opts.mc.threads, [&](std::size_t t) {
      Stream rng = derive_substream(seed, t);
      const Matrix x = sample_structured_matrix(spec, rng);
      detail::TrialStats s;
      s.max_entry = max_abs_entry(x);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        s.max_row = std::max(s.max_row, lp_norm(Vector(x.row(i).transpose()), pq.p()));
      }
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        s.max_col = std::max(s.max_col, lp_norm(Vector(x.col(j)), pq.q()));
      }
      if (opnorm) {
        const NormEstimate est = power_iterate_lower(x, pq, opts.mc.power, rng);
        s.lower = est.lower;
        s.upper = est.upper;
      }
      return s;
    });
    std::vector<double> lowers, uppers, entries, rows, cols, rows_q;
    for (const auto& s : stats) {
      lowers.push_back(s.lower);
      uppers.push_back(s.upper);
      entries.push_back(s.max_entry);
      rows.push_back(s.max_row);
      cols.push_back(s.max_col);
      rows_q.push_back(std::pow(s.max_row, pq.q()));
    }
    aux.max_entry = mean_se(entries).mean;
    aux.max_row_norm = mean_se(rows).mean;
    aux.max_col_norm = mean_se(cols).mean;
    if (opnorm) {
      const MeanSe lo = mean_se(lowers);
      rep.lhs_mean = lo.mean;
      rep.lhs_se = lo.se;
      rep.upper_mean = mean_se(uppers).mean;
    } else if (id == "lemma31") {
      // (E max_i ||X_i||_p^q)^{1/q}, SE by the delta method.
      const MeanSe w = mean_se(rows_q);
      rep.lhs_mean = std::pow(w.mean, 1.0 / pq.q());
      rep.lhs_se = w.mean > 0 ? w.se * std::pow(w.mean, 1.0 / pq.q() - 1.0) / pq.q() : 0.0;
    } else {  // prop15
      const MeanSe r = mean_se(rows);
      rep.lhs_mean = r.mean;
      rep.lhs_se = r.se;
    }
  }

  rep.terms = theorem_terms(id, spec.coeff, pq, aux, ctx);
  std::vector<double> values;
  double biggest = 0.0;
  for (const auto& t : rep.terms) {
    values.push_back(t.value);
    biggest = std::max(biggest, t.value);
  }
  rep.rhs_bracket = sorted_sum(values);
  rep.ratio = rep.rhs_bracket > 0 ? rep.lhs_mean / rep.rhs_bracket
                                  : (rep.lhs_mean > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (id == "reverse12") {
    rep.reverse_ratio = biggest > 0 ? rep.lhs_mean / biggest : 0.0;
    rep.reverse_ratio_upper = biggest > 0 ? *rep.upper_mean / biggest : 0.0;
    rep.reverse_ok = *rep.reverse_ratio >= opts.reverse_floor;
  }
  if (opts.record_runtime) {
    rep.runtime_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  }
  return rep;
}

}  // namespace lpqlab
