#pragma once

// Random matrix laws X_ij = A_ij * Y_ij: isotropic log-concave rows,
// Gaussian mixtures |Z_ij|^gamma B_ij G_ij, beta-regular symmetric entries,
// and sign-randomized (unconditional) wrappers.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

#include "core.hpp"
#include "random.hpp"

namespace lpqlab {

enum class Family {
  gaussian,
  laplace,
  cube_uniform,
  ball_uniform,
  l1ball_uniform,
  gaussian_mixture,
  beta_regular,
  unconditional_wrap,
};

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::gaussian,       Family::laplace,          Family::cube_uniform,
    Family::ball_uniform,   Family::l1ball_uniform,   Family::gaussian_mixture,
    Family::beta_regular,   Family::unconditional_wrap};

inline constexpr std::array<Family, 5> kLogConcaveFamilies = {
    Family::gaussian, Family::laplace, Family::cube_uniform, Family::ball_uniform,
    Family::l1ball_uniform};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::gaussian: return "gaussian";
    case Family::laplace: return "laplace";
    case Family::cube_uniform: return "cube_uniform";
    case Family::ball_uniform: return "ball_uniform";
    case Family::l1ball_uniform: return "l1ball_uniform";
    case Family::gaussian_mixture: return "gaussian_mixture";
    case Family::beta_regular: return "beta_regular";
    case Family::unconditional_wrap: return "unconditional_wrap";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  for (Family f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw DomainError("unknown family '" + std::string(name) + "'");
}

inline bool is_log_concave(Family f) {
  for (Family g : kLogConcaveFamilies) {
    if (f == g) return true;
  }
  return false;
}

/// Families whose row coordinates are independent.
inline bool is_product(Family f) {
  return f == Family::gaussian || f == Family::laplace || f == Family::cube_uniform ||
         f == Family::beta_regular;
}

/// E|g|^s for a standard Gaussian g, s > -1.
inline double gaussian_abs_moment(double s) {
  return std::pow(2.0, s / 2.0) * std::tgamma((s + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

/// Normalizer c_beta with E(|g|^{2 beta} / c_beta)^2 = 1.
inline double beta_regular_constant(double beta) {
  return std::sqrt(gaussian_abs_moment(4.0 * beta));
}

/// Full description of the law of X.
struct EnsembleSpec {
  Family family = Family::gaussian;
  CoeffMatrix coeff = CoeffMatrix::ones(1, 1);
  /// gaussian_mixture: exponent on |Z_ij|.
  double gamma = 0.0;
  /// gaussian_mixture: law of Z. Product families act entrywise;
  /// ball_uniform / l1ball_uniform draw Z as one mn-dimensional vector.
  Family mixture_base = Family::gaussian;
  /// beta_regular: moment growth exponent and its two-sided constant.
  double beta = 0.5;
  double L = 1.0;
  /// unconditional_wrap: the law whose entries get random signs.
  std::shared_ptr<const EnsembleSpec> base;

  Eigen::Index m() const { return coeff.m(); }
  Eigen::Index n() const { return coeff.n(); }

  static EnsembleSpec log_concave(Family f, CoeffMatrix a) {
    EnsembleSpec s;
    s.family = f;
    s.coeff = std::move(a);
    s.validate();
    return s;
  }

  static EnsembleSpec mixture(CoeffMatrix b, double gamma, Family z_family = Family::gaussian) {
    EnsembleSpec s;
    s.family = Family::gaussian_mixture;
    s.coeff = std::move(b);
    s.gamma = gamma;
    s.mixture_base = z_family;
    s.validate();
    return s;
  }

  static EnsembleSpec beta_regular(CoeffMatrix a, double beta, double L = 1.0) {
    EnsembleSpec s;
    s.family = Family::beta_regular;
    s.coeff = std::move(a);
    s.beta = beta;
    s.L = L;
    s.validate();
    return s;
  }

  static EnsembleSpec unconditional(EnsembleSpec inner) {
    EnsembleSpec s;
    s.family = Family::unconditional_wrap;
    s.coeff = inner.coeff;
    s.base = std::make_shared<const EnsembleSpec>(std::move(inner));
    s.validate();
    return s;
  }

  /// Same law with a different coefficient matrix (the wrapper forwards it
  /// to its base).
  EnsembleSpec with_coeff(CoeffMatrix a) const {
    EnsembleSpec s = *this;
    if (family == Family::unconditional_wrap) {
      s.base = std::make_shared<const EnsembleSpec>(base->with_coeff(a));
    }
    s.coeff = std::move(a);
    s.validate();
    return s;
  }

  void validate() const {
    switch (family) {
      case Family::gaussian_mixture:
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
          throw DomainError("gaussian_mixture: gamma must be >= 0");
        }
        if (!is_log_concave(mixture_base)) {
          throw DomainError("gaussian_mixture: Z must come from a log-concave family");
        }
        break;
      case Family::beta_regular:
        if (!(beta >= 0.5) || !std::isfinite(beta)) {
          throw DomainError("beta_regular: beta must be >= 1/2");
        }
        if (!(L >= 1.0)) throw DomainError("beta_regular: L must be >= 1");
        break;
      case Family::unconditional_wrap:
        if (!base) throw DomainError("unconditional_wrap: missing base ensemble");
        if (base->m() != m() || base->n() != n()) {
          throw DomainError("unconditional_wrap: base dims differ from coeff dims");
        }
        base->validate();
        break;
      default:
        break;
    }
  }

  /// True when the rows of Y are independent (needed by row-moment
  /// estimators that pool draws of a single row).
  bool rows_independent() const {
    if (is_log_concave(family) || family == Family::beta_regular) return true;
    if (family == Family::gaussian_mixture) return is_product(mixture_base);
    if (family == Family::unconditional_wrap) return base->rows_independent();
    return false;
  }

  std::string summary() const {
    std::ostringstream os;
    os << family_name(family) << " " << m() << "x" << n();
    if (family == Family::gaussian_mixture) {
      os << " gamma=" << gamma << " z=" << family_name(mixture_base);
    } else if (family == Family::beta_regular) {
      os << " beta=" << beta << " L=" << L;
    } else if (family == Family::unconditional_wrap) {
      os << " base=(" << base->summary() << ")";
    }
    return os.str();
  }
};

/// Scalar s such that s times the canonical representative of a log-concave
/// family is isotropic in R^n.
inline double isotropic_scale(Family f, Eigen::Index n) {
  if (n < 1) throw DomainError("isotropic_scale: n must be >= 1");
  const double dn = static_cast<double>(n);
  switch (f) {
    case Family::gaussian: return 1.0;
    case Family::laplace: return 1.0 / std::numbers::sqrt2;
    case Family::cube_uniform: return std::numbers::sqrt3;
    case Family::ball_uniform: return std::sqrt(dn + 2.0);
    case Family::l1ball_uniform: return std::sqrt((dn + 1.0) * (dn + 2.0) / 2.0);
    default:
      throw DomainError("isotropic_scale: family '" + std::string(family_name(f)) +
                        "' has no scalar normalization");
  }
}

namespace detail {

template <typename Rng>
double random_sign(Rng& rng) {
  return (rng() >> 63) != 0 ? 1.0 : -1.0;
}

// One isotropic draw of a log-concave family in R^n.
template <typename Rng>
Vector draw_log_concave(Family f, Eigen::Index n, Rng& rng) {
  Vector y(n);
  const double s = isotropic_scale(f, n);
  switch (f) {
    case Family::gaussian: {
      std::normal_distribution<double> g;
      for (Eigen::Index j = 0; j < n; ++j) y(j) = g(rng);
      break;
    }
    case Family::laplace: {
      std::exponential_distribution<double> e(1.0);
      for (Eigen::Index j = 0; j < n; ++j) y(j) = s * random_sign(rng) * e(rng);
      break;
    }
    case Family::cube_uniform: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (Eigen::Index j = 0; j < n; ++j) y(j) = s * u(rng);
      break;
    }
    case Family::ball_uniform: {
      std::normal_distribution<double> g;
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double norm2 = 0.0;
      do {
        for (Eigen::Index j = 0; j < n; ++j) y(j) = g(rng);
        norm2 = y.squaredNorm();
      } while (norm2 == 0.0);
      const double radius = std::pow(u(rng), 1.0 / static_cast<double>(n));
      y *= s * radius / std::sqrt(norm2);
      break;
    }
    case Family::l1ball_uniform: {
      // (E_1..E_n)/sum_{k<=n+1} E_k is uniform on the simplex interior.
      std::exponential_distribution<double> e(1.0);
      double total = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        y(j) = e(rng);
        total += y(j);
      }
      total += e(rng);
      for (Eigen::Index j = 0; j < n; ++j) y(j) = s * random_sign(rng) * y(j) / total;
      break;
    }
    default:
      throw DomainError("not a log-concave row family");
  }
  return y;
}

template <typename Rng>
double draw_beta_regular(double beta, double c_beta, Rng& rng) {
  std::normal_distribution<double> g;
  const double x = std::abs(g(rng));
  return random_sign(rng) * std::pow(x, 2.0 * beta) / c_beta;
}

}  // namespace detail

/// One row Y_i of a log-concave family (coefficients not applied).
template <typename Rng>
Vector sample_row(const EnsembleSpec& spec, Rng& rng) {
  if (!is_log_concave(spec.family)) {
    throw DomainError("sample_row: '" + std::string(family_name(spec.family)) +
                      "' is not a log-concave row family");
  }
  return detail::draw_log_concave(spec.family, spec.n(), rng);
}

/// One coefficient-free row of Y for any law with independent rows.
template <typename Rng>
Vector sample_unit_row(const EnsembleSpec& spec, Rng& rng) {
  if (!spec.rows_independent()) {
    throw DomainError("sample_unit_row: rows of '" + spec.summary() + "' are not independent");
  }
  const Eigen::Index n = spec.n();
  switch (spec.family) {
    case Family::beta_regular: {
      const double c = beta_regular_constant(spec.beta);
      Vector y(n);
      for (Eigen::Index j = 0; j < n; ++j) y(j) = detail::draw_beta_regular(spec.beta, c, rng);
      return y;
    }
    case Family::gaussian_mixture: {
      Vector z = detail::draw_log_concave(spec.mixture_base, n, rng);
      std::normal_distribution<double> g;
      Vector y(n);
      for (Eigen::Index j = 0; j < n; ++j) y(j) = std::pow(std::abs(z(j)), spec.gamma) * g(rng);
      return y;
    }
    case Family::unconditional_wrap: {
      Vector y = sample_unit_row(*spec.base, rng);
      for (Eigen::Index j = 0; j < n; ++j) y(j) *= detail::random_sign(rng);
      return y;
    }
    default:
      return sample_row(spec, rng);
  }
}

/// One realization of X.
template <typename Rng>
Matrix sample_structured_matrix(const EnsembleSpec& spec, Rng& rng) {
  spec.validate();
  const Eigen::Index m = spec.m();
  const Eigen::Index n = spec.n();
  const Matrix& a = spec.coeff.entries();
  Matrix x(m, n);
  switch (spec.family) {
    case Family::gaussian_mixture: {
      Matrix z(m, n);
      if (is_product(spec.mixture_base)) {
        for (Eigen::Index i = 0; i < m; ++i) {
          z.row(i) = detail::draw_log_concave(spec.mixture_base, n, rng).transpose();
        }
      } else {
        const Vector flat = detail::draw_log_concave(spec.mixture_base, m * n, rng);
        for (Eigen::Index i = 0; i < m; ++i) {
          for (Eigen::Index j = 0; j < n; ++j) z(i, j) = flat(i * n + j);
        }
      }
      std::normal_distribution<double> g;
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          x(i, j) = std::pow(std::abs(z(i, j)), spec.gamma) * a(i, j) * g(rng);
        }
      }
      return x;
    }
    case Family::beta_regular: {
      const double c = beta_regular_constant(spec.beta);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          x(i, j) = a(i, j) * detail::draw_beta_regular(spec.beta, c, rng);
        }
      }
      return x;
    }
    case Family::unconditional_wrap: {
      x = sample_structured_matrix(*spec.base, rng);
      for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) x(i, j) *= detail::random_sign(rng);
      }
      return x;
    }
    default:
      for (Eigen::Index i = 0; i < m; ++i) {
        x.row(i) = (a.row(i).transpose().array() * sample_row(spec, rng).array()).transpose();
      }
      return x;
  }
}

/// Streaming view of T realizations; trial t always draws from
/// derive_substream(seed, t).
struct SampleBatch {
  EnsembleSpec spec;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  Matrix draw(std::size_t t) const {
    Stream rng = derive_substream(seed, t);
    return sample_structured_matrix(spec, rng);
  }
};

struct CovarianceEstimate {
  Matrix covariance;
  Vector mean;
  /// Standard error of each coordinate mean.
  Vector mean_se;
  /// max_{jk} |C_hat - I|_{jk}
  double max_deviation = 0.0;
};

/// Empirical covariance of T rows; draw t uses derive_substream(seed, t).
inline CovarianceEstimate estimate_covariance(const EnsembleSpec& spec, std::size_t trials,
                                              std::uint64_t seed) {
  if (trials < 2) throw DomainError("estimate_covariance: need at least 2 draws");
  const Eigen::Index n = spec.n();
  Vector sum = Vector::Zero(n);
  Matrix second = Matrix::Zero(n, n);
  for (std::size_t t = 0; t < trials; ++t) {
    Stream rng = derive_substream(seed, t);
    const Vector y = sample_row(spec, rng);
    sum += y;
    second.selfadjointView<Eigen::Lower>().rankUpdate(y);
  }
  second = second.selfadjointView<Eigen::Lower>();
  const double dt = static_cast<double>(trials);
  CovarianceEstimate est;
  est.mean = sum / dt;
  est.covariance = (second - dt * est.mean * est.mean.transpose()) / (dt - 1.0);
  est.mean_se = (est.covariance.diagonal() / dt).cwiseSqrt();
  est.max_deviation = (est.covariance - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return est;
}

}  // namespace lpqlab
