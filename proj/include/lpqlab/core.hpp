#pragma once

// Deterministic primitives shared by every other module: vector r-norms,
// Hoelder conjugation, rearrangements, the exponent pair and the
// coefficient matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lpqlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Infinite exponent. IEEE infinity is the distinguished value; it is never
/// raised to a power.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raised on precondition violations (bad exponents, non-finite data,
/// incompatible ensemble/inequality pairs).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline void require_finite(std::span<const double> x, const char* what) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(what) + ": non-finite input");
    }
  }
}

inline void require_exponent(double r, const char* what) {
  if (std::isnan(r) || r < 1.0) {
    throw DomainError(std::string(what) + ": exponent must be >= 1 or +inf");
  }
}

// Unchecked norm kernel; assumes finite data and a valid exponent.
inline double lp_norm_unchecked(std::span<const double> x, double r) {
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || std::isinf(r)) return scale;
  CompensatedSum acc;
  if (r == 1.0) {
    for (double v : x) acc.add(std::abs(v));
    return acc.value();
  }
  if (r == 2.0) {
    for (double v : x) {
      const double s = v / scale;
      acc.add(s * s);
    }
    return scale * std::sqrt(acc.value());
  }
  for (double v : x) acc.add(std::pow(std::abs(v) / scale, r));
  return scale * std::pow(acc.value(), 1.0 / r);
}

}  // namespace detail

/// l_r norm of a vector, r in [1, inf]. Powers are taken after scaling by
/// the largest magnitude and summed with compensation.
inline double lp_norm(std::span<const double> x, double r) {
  detail::require_exponent(r, "lp_norm");
  detail::require_finite(x, "lp_norm");
  return detail::lp_norm_unchecked(x, r);
}

inline double lp_norm(const Vector& x, double r) {
  return lp_norm(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), r);
}

/// r/(r-1); 1 maps to +inf and +inf maps to 1.
inline double holder_conjugate(double r) {
  detail::require_exponent(r, "holder_conjugate");
  if (std::isinf(r)) return 1.0;
  if (r == 1.0) return kInf;
  return r / (r - 1.0);
}

/// The absolute values of `a` sorted in nonincreasing order.
inline std::vector<double> nonincreasing_rearrangement(std::span<const double> a) {
  detail::require_finite(a, "nonincreasing_rearrangement");
  std::vector<double> out;
  out.reserve(a.size());
  for (double v : a) out.push_back(std::abs(v));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline double max_abs_entry(const Matrix& x) {
  if (x.size() == 0) throw DomainError("max_abs_entry: empty matrix");
  if (!x.allFinite()) throw DomainError("max_abs_entry: non-finite input");
  return x.cwiseAbs().maxCoeff();
}

/// Exponent pair (p, q), both in [2, inf), with Hoelder conjugates.
class PQParams {
 public:
  PQParams(double p, double q) : p_(p), q_(q) {
    if (!std::isfinite(p) || !std::isfinite(q) || p < 2.0 || q < 2.0) {
      throw DomainError("PQParams: require finite p >= 2 and q >= 2");
    }
    p_conj_ = holder_conjugate(p);
    q_conj_ = holder_conjugate(q);
  }

  double p() const { return p_; }
  double q() const { return q_; }
  double p_conj() const { return p_conj_; }
  double q_conj() const { return q_conj_; }

  /// Exponents of the transposed problem: ||X||_{p'->q} = ||X^T||_{q'->p}.
  PQParams transposed() const { return PQParams(q_, p_); }

 private:
  double p_;
  double q_;
  double p_conj_;
  double q_conj_;
};

/// Deterministic m x n coefficient matrix with finite entries.
class CoeffMatrix {
 public:
  explicit CoeffMatrix(Matrix entries) : a_(std::move(entries)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw DomainError("CoeffMatrix: empty");
    if (!a_.allFinite()) throw DomainError("CoeffMatrix: non-finite entry");
  }

  static CoeffMatrix ones(Eigen::Index m, Eigen::Index n) {
    return CoeffMatrix(Matrix::Ones(m, n));
  }
  static CoeffMatrix zeros(Eigen::Index m, Eigen::Index n) {
    return CoeffMatrix(Matrix::Zero(m, n));
  }
  static CoeffMatrix identity(Eigen::Index n) {
    return CoeffMatrix(Matrix::Identity(n, n));
  }

  Eigen::Index m() const { return a_.rows(); }
  Eigen::Index n() const { return a_.cols(); }
  const Matrix& entries() const { return a_; }

  Vector row(Eigen::Index i) const { return a_.row(i).transpose(); }
  Vector col(Eigen::Index j) const { return a_.col(j); }

  /// max_i ||A_i||_r
  double max_row_norm(double r) const {
    double best = 0.0;
    for (Eigen::Index i = 0; i < m(); ++i) best = std::max(best, lp_norm(row(i), r));
    return best;
  }
  /// max_j ||A^(j)||_r
  double max_col_norm(double r) const {
    double best = 0.0;
    for (Eigen::Index j = 0; j < n(); ++j) best = std::max(best, lp_norm(col(j), r));
    return best;
  }

 private:
  Matrix a_;
};

/// Natural logarithm of a dimension that enters a bound; dimensions below 2
/// make the log factor vanish or go negative, so they are rejected.
inline double log_dim(Eigen::Index d, const char* what) {
  if (d < 2) throw DomainError(std::string(what) + ": dimension must be >= 2 for a log factor");
  return std::log(static_cast<double>(d));
}

/// Sum of values, sorted first so the result does not depend on the order
/// in which parallel trials finished.
inline double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  detail::CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and standard error (sample SD / sqrt(T)).
inline MeanSe mean_se(const std::vector<double>& values) {
  const auto t = values.size();
  if (t == 0) return {};
  const double mean = sorted_sum(values) / static_cast<double>(t);
  if (t < 2) return {mean, 0.0};
  std::vector<double> sq;
  sq.reserve(t);
  for (double v : values) sq.push_back((v - mean) * (v - mean));
  const double var = sorted_sum(std::move(sq)) / static_cast<double>(t - 1);
  return {mean, std::sqrt(var / static_cast<double>(t))};
}

}  // namespace lpqlab
