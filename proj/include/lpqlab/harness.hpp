#pragma once

// Experiment configuration, grid execution and CSV / JSONL persistence.
//
// Config files are flat `key = value` lines grouped under `[section]`
// headers; `#` starts a comment. Keys are addressed as `section.key`.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "bounds.hpp"
#include "core.hpp"
#include "ensembles.hpp"
#include "momentslab.hpp"

namespace lpqlab {

/// Raised for malformed configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  /// Inequality id or moment check id.
  std::string target = "main11";

  Family family = Family::gaussian;
  /// ones | identity | zeros
  std::string coeff = "ones";
  double gamma = 1.0;
  Family mixture_base = Family::gaussian;
  double beta = 0.5;
  double L = 1.0;
  /// Law wrapped by unconditional_wrap.
  Family wrap_base = Family::gaussian;

  std::vector<std::pair<long long, long long>> dims = {{16, 16}};
  /// (p, q) pairs; moment checks read them as (norm exponent or higher
  /// order, lower order) as documented per check.
  std::vector<std::pair<double, double>> pq = {{2.0, 2.0}};

  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t restarts = 8;
  double tol = 1e-10;
  int max_iter = 10000;
  int probe_iters = 2;
  std::size_t refine = 16;
  unsigned threads = 0;
  bool improved_exponents = false;
  bool record_runtime = false;
  double reverse_floor = 0.25;

  // Moment checks.
  double norm_p = 2.0;
  std::vector<double> u_grid = {0.5, 1.0, 2.0};
  double c4 = std::numbers::e * std::numbers::e;
  std::vector<double> r_grid = {2.0, 4.0, 8.0, 16.0};
  /// sudakov coefficients: harmonic (1/k) | ones | e1
  std::string sudakov_a = "harmonic";
  /// momclaim direction: ones (normalized to unit l2) | e1
  std::string claim_t = "ones";

  std::string out = "-";
  std::string format = "csv";
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    const auto piece = trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || end != v.c_str() + v.size()) {
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  }
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline Family to_family(const std::string& key, const std::string& v) {
  try {
    return parse_family(v);
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

inline std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& piece : split(v, ',')) out.push_back(to_double(key, piece));
  return out;
}

}  // namespace detail

/// Applies one `section.key = value` setting.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  if (key == "experiment.id") c.experiment_id = value;
  else if (key == "experiment.target") c.target = value;
  else if (key == "ensemble.family") c.family = to_family(key, value);
  else if (key == "ensemble.coeff") c.coeff = value;
  else if (key == "ensemble.gamma") c.gamma = to_double(key, value);
  else if (key == "ensemble.mixture_base") c.mixture_base = to_family(key, value);
  else if (key == "ensemble.beta") c.beta = to_double(key, value);
  else if (key == "ensemble.L") c.L = to_double(key, value);
  else if (key == "ensemble.wrap_base") c.wrap_base = to_family(key, value);
  else if (key == "grid.dims") {
    c.dims.clear();
    for (const auto& cell : split(value, ',')) {
      const auto parts = split(cell, 'x');
      if (parts.size() != 2) throw ConfigError(key + ": expected MxN, got '" + cell + "'");
      c.dims.emplace_back(to_int(key, parts[0]), to_int(key, parts[1]));
    }
  } else if (key == "grid.pq") {
    c.pq.clear();
    for (const auto& cell : split(value, ',')) {
      const auto parts = split(cell, ':');
      if (parts.size() != 2) throw ConfigError(key + ": expected P:Q, got '" + cell + "'");
      c.pq.emplace_back(to_double(key, parts[0]), to_double(key, parts[1]));
    }
  } else if (key == "run.trials") c.trials = static_cast<std::size_t>(to_u64(key, value));
  else if (key == "run.seed") c.seed = to_u64(key, value);
  else if (key == "run.restarts") c.restarts = static_cast<std::size_t>(to_u64(key, value));
  else if (key == "run.tol") c.tol = to_double(key, value);
  else if (key == "run.max_iter") c.max_iter = static_cast<int>(to_int(key, value));
  else if (key == "run.probe_iters") c.probe_iters = static_cast<int>(to_int(key, value));
  else if (key == "run.refine") c.refine = static_cast<std::size_t>(to_u64(key, value));
  else if (key == "run.threads") c.threads = static_cast<unsigned>(to_u64(key, value));
  else if (key == "run.improved_exponents") c.improved_exponents = to_bool(key, value);
  else if (key == "run.record_runtime") c.record_runtime = to_bool(key, value);
  else if (key == "run.reverse_floor") c.reverse_floor = to_double(key, value);
  else if (key == "moments.norm_p") c.norm_p = to_double(key, value);
  else if (key == "moments.u_grid") c.u_grid = to_doubles(key, value);
  else if (key == "moments.c4") c.c4 = to_double(key, value);
  else if (key == "moments.r_grid") c.r_grid = to_doubles(key, value);
  else if (key == "moments.a") c.sudakov_a = value;
  else if (key == "moments.t") c.claim_t = value;
  else if (key == "output.path") c.out = value;
  else if (key == "output.format") c.format = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig c = {}) {
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": key outside a section");
    apply_setting(c, section + "." + key, value);
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig c = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, std::move(c));
}

/// LPQLAB_SEED overrides the file seed (CLI flags override both).
inline void apply_env(ExperimentConfig& c) {
  if (const char* s = std::getenv("LPQLAB_SEED"); s != nullptr && *s != '\0') {
    c.seed = detail::to_u64("LPQLAB_SEED", s);
  }
}

// ---------------------------------------------------------------------------
// Result rows.

inline constexpr std::array<std::string_view, 24> kCsvHeader = {
    "experiment_id", "inequality_id", "family", "m", "n", "p", "q", "gamma", "beta", "L",
    "trials", "seed", "lhs_mean", "lhs_se", "term1_name", "term1", "term2_name", "term2",
    "term3_name", "term3", "rhs_bracket", "ratio", "reverse_ratio", "runtime_ms"};

/// One CSV line. Reals are stored already rounded to 10 significant digits,
/// so emitting and parsing back gives identical values.
struct ResultRow {
  std::string experiment_id;
  std::string inequality_id;
  std::string family;
  std::optional<long long> m, n;
  std::optional<double> p, q, gamma, beta, L;
  std::optional<long long> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> lhs_mean, lhs_se;
  std::string term1_name;
  std::optional<double> term1;
  std::string term2_name;
  std::optional<double> term2;
  std::string term3_name;
  std::optional<double> term3;
  std::optional<double> rhs_bracket, ratio, reverse_ratio;
  std::optional<long long> runtime_ms;

  bool is_error() const { return term1_name.rfind("error:", 0) == 0; }
  bool operator==(const ResultRow&) const = default;
};

inline std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline double round10(double v) { return std::strtod(format_real(v).c_str(), nullptr); }

namespace detail {

inline std::optional<double> r10(std::optional<double> v) {
  if (!v) return std::nullopt;
  return round10(*v);
}

inline std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

inline void put_terms(ResultRow& row, const std::vector<Term>& terms) {
  if (terms.size() > 3) throw std::logic_error("result rows hold at most three terms");
  std::string* names[] = {&row.term1_name, &row.term2_name, &row.term3_name};
  std::optional<double>* values[] = {&row.term1, &row.term2, &row.term3};
  std::vector<double> rounded;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    *names[k] = terms[k].name;
    *values[k] = round10(terms[k].value);
    rounded.push_back(**values[k]);
  }
  row.rhs_bracket = round10(sorted_sum(rounded));
}

}  // namespace detail

inline ResultRow row_from_bound(const std::string& experiment_id, const BoundReport& r,
                                bool record_runtime) {
  ResultRow row;
  row.experiment_id = detail::sanitize(experiment_id);
  row.inequality_id = r.inequality_id;
  row.family = std::string(family_name(r.family));
  row.m = r.m;
  row.n = r.n;
  row.p = round10(r.p);
  row.q = round10(r.q);
  row.gamma = detail::r10(r.gamma);
  row.beta = detail::r10(r.beta);
  row.L = detail::r10(r.L);
  row.trials = static_cast<long long>(r.trials);
  row.seed = r.seed;
  row.lhs_mean = round10(r.lhs_mean);
  row.lhs_se = round10(r.lhs_se);
  detail::put_terms(row, r.terms);
  row.ratio = round10(r.ratio);
  row.reverse_ratio = detail::r10(r.reverse_ratio);
  if (record_runtime) row.runtime_ms = r.runtime_ms;
  return row;
}

inline ResultRow row_from_moment(const std::string& experiment_id, const MomentReport& r) {
  ResultRow row;
  row.experiment_id = detail::sanitize(experiment_id);
  row.inequality_id = r.check_id;
  row.family = std::string(family_name(r.family));
  row.m = r.m;
  row.n = r.n;
  row.p = detail::r10(r.param("p"));
  row.q = detail::r10(r.param("q"));
  row.beta = detail::r10(r.param("beta"));
  row.L = detail::r10(r.param("L"));
  row.trials = static_cast<long long>(r.trials);
  row.seed = r.seed;
  row.lhs_mean = round10(r.lhs);
  detail::put_terms(row, r.terms);
  row.ratio = round10(r.constant);
  return row;
}

inline ResultRow error_row(const ExperimentConfig& c, long long m, long long n, double p, double q,
                           const std::string& reason) {
  ResultRow row;
  row.experiment_id = detail::sanitize(c.experiment_id);
  row.inequality_id = c.target;
  row.family = std::string(family_name(c.family));
  row.m = m;
  row.n = n;
  row.p = round10(p);
  row.q = round10(q);
  row.trials = static_cast<long long>(c.trials);
  row.seed = c.seed;
  row.term1_name = detail::sanitize("error: " + reason);
  return row;
}

namespace detail {

inline std::vector<std::string> row_cells(const ResultRow& r) {
  auto real = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  auto integer = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
  return {r.experiment_id, r.inequality_id, r.family,    integer(r.m),      integer(r.n),
          real(r.p),       real(r.q),       real(r.gamma), real(r.beta),    real(r.L),
          integer(r.trials), integer(r.seed), real(r.lhs_mean), real(r.lhs_se), r.term1_name,
          real(r.term1),   r.term2_name,    real(r.term2), r.term3_name,    real(r.term3),
          real(r.rhs_bracket), real(r.ratio), real(r.reverse_ratio), integer(r.runtime_ms)};
}

}  // namespace detail

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  for (std::size_t k = 0; k < kCsvHeader.size(); ++k) os << (k ? "," : "") << kCsvHeader[k];
  os << "\n";
  for (const auto& r : rows) {
    const auto cells = detail::row_cells(r);
    for (std::size_t k = 0; k < cells.size(); ++k) os << (k ? "," : "") << cells[k];
    os << "\n";
  }
}

inline void write_jsonl(std::ostream& os, const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    const auto cells = detail::row_cells(r);
    nlohmann::ordered_json obj;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const std::string key(kCsvHeader[k]);
      const std::string& cell = cells[k];
      const bool text = key == "experiment_id" || key == "inequality_id" || key == "family" ||
                        key.ends_with("_name");
      if (text) {
        obj[key] = cell;
      } else if (cell.empty()) {
        obj[key] = nullptr;
      } else if (key == "m" || key == "n" || key == "trials" || key == "runtime_ms") {
        obj[key] = std::stoll(cell);
      } else if (key == "seed") {
        obj[key] = std::stoull(cell);
      } else {
        const double v = std::strtod(cell.c_str(), nullptr);
        if (std::isfinite(v)) obj[key] = v;
        else obj[key] = nullptr;
      }
    }
    os << obj.dump() << "\n";
  }
}

/// Writes rows to `path` ("-" for stdout) as csv or jsonl.
inline void emit_results(const std::vector<ResultRow>& rows, const std::string& path,
                         const std::string& format) {
  if (format != "csv" && format != "jsonl") throw ConfigError("unknown output format '" + format + "'");
  auto write = [&](std::ostream& os) {
    if (format == "csv") write_csv(os, rows);
    else write_jsonl(os, rows);
  };
  if (path == "-" || path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// Parses text produced by write_csv.
inline std::vector<ResultRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto pos = line.find(',', start);
      cells.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cells.size() != kCsvHeader.size()) throw std::runtime_error("csv: wrong column count");
    auto real = [&](std::size_t k) -> std::optional<double> {
      if (cells[k].empty()) return std::nullopt;
      return std::strtod(cells[k].c_str(), nullptr);
    };
    auto integer = [&](std::size_t k) -> std::optional<long long> {
      if (cells[k].empty()) return std::nullopt;
      return std::stoll(cells[k]);
    };
    ResultRow r;
    r.experiment_id = cells[0];
    r.inequality_id = cells[1];
    r.family = cells[2];
    r.m = integer(3);
    r.n = integer(4);
    r.p = real(5);
    r.q = real(6);
    r.gamma = real(7);
    r.beta = real(8);
    r.L = real(9);
    r.trials = integer(10);
    if (!cells[11].empty()) r.seed = std::stoull(cells[11]);
    r.lhs_mean = real(12);
    r.lhs_se = real(13);
    r.term1_name = cells[14];
    r.term1 = real(15);
    r.term2_name = cells[16];
    r.term2 = real(17);
    r.term3_name = cells[18];
    r.term3 = real(19);
    r.rhs_bracket = real(20);
    r.ratio = real(21);
    r.reverse_ratio = real(22);
    r.runtime_ms = integer(23);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Execution.

inline CoeffMatrix build_coeff(const std::string& kind, long long m, long long n) {
  if (m < 1 || n < 1) throw DomainError("dimensions must be >= 1");
  if (kind == "ones") return CoeffMatrix::ones(m, n);
  if (kind == "zeros") return CoeffMatrix::zeros(m, n);
  if (kind == "identity") return CoeffMatrix(Matrix::Identity(m, n));
  throw DomainError("unknown coeff kind '" + kind + "'");
}

inline EnsembleSpec build_spec(const ExperimentConfig& c, long long m, long long n) {
  CoeffMatrix a = build_coeff(c.coeff, m, n);
  switch (c.family) {
    case Family::gaussian_mixture: return EnsembleSpec::mixture(a, c.gamma, c.mixture_base);
    case Family::beta_regular: return EnsembleSpec::beta_regular(a, c.beta, c.L);
    case Family::unconditional_wrap: {
      if (c.wrap_base == Family::unconditional_wrap) throw DomainError("wrap_base cannot be a wrapper");
      ExperimentConfig inner = c;
      inner.family = c.wrap_base;
      return EnsembleSpec::unconditional(build_spec(inner, m, n));
    }
    default: return EnsembleSpec::log_concave(c.family, a);
  }
}

inline VerifyOptions verify_options(const ExperimentConfig& c) {
  VerifyOptions o;
  o.mc.power.restarts = c.restarts;
  o.mc.power.tol = c.tol;
  o.mc.power.max_iter = c.max_iter;
  o.mc.power.probe_iters = c.probe_iters;
  o.mc.power.refine = c.refine;
  o.mc.threads = c.threads;
  o.weak.restarts = c.restarts;
  o.weak.threads = c.threads;
  o.improved_exponents = c.improved_exponents;
  o.reverse_floor = c.reverse_floor;
  o.record_runtime = c.record_runtime;
  return o;
}

/// Runs one moment check for a grid cell. (p, q) mean: regularity: higher
/// and lower moment order; weakstrong: norm exponent and moment order;
/// tailcmp: norm exponent (q unused). sudakov uses m as the vector length;
/// the other checks use n as the row dimension.
inline MomentReport run_moment_cell(const ExperimentConfig& c, long long m, long long n, double p,
                                    double q) {
  const std::string& id = c.target;
  if (id == "regularity") {
    return regularity_constant(build_spec(c, 1, n), c.norm_p, p, q, c.trials, c.seed, c.threads);
  }
  if (id == "weakstrong") {
    WeakMomentOptions w;
    w.threads = c.threads;
    return weak_strong_constant(build_spec(c, 1, n), p, q, c.trials, c.restarts, c.seed, w);
  }
  if (id == "tailcmp") {
    return tail_comparison(build_spec(c, 1, n), p, c.u_grid, c.c4, c.trials, c.seed, 64, c.threads).report;
  }
  if (id == "sudakov") {
    std::vector<double> a(static_cast<std::size_t>(m), 0.0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (c.sudakov_a == "harmonic") a[k] = 1.0 / static_cast<double>(k + 1);
      else if (c.sudakov_a == "ones") a[k] = 1.0;
      else if (c.sudakov_a == "e1") a[k] = k == 0 ? 1.0 : 0.0;
      else throw DomainError("unknown sudakov coefficients '" + c.sudakov_a + "'");
    }
    return sudakov_ratio(a, c.family, c.trials, c.seed, c.threads);
  }
  if (id == "momclaim") {
    std::vector<double> t(static_cast<std::size_t>(n), 0.0);
    if (c.claim_t == "ones") {
      for (auto& v : t) v = 1.0 / std::sqrt(static_cast<double>(n));
    } else if (c.claim_t == "e1") {
      t[0] = 1.0;
    } else {
      throw DomainError("unknown claim direction '" + c.claim_t + "'");
    }
    return moment_comparison_claim(c.beta, c.L, t, c.r_grid, c.trials, c.seed, c.threads);
  }
  if (id == "momprofile") {
    return moment_growth_profile(build_spec(c, 1, n), c.r_grid, c.trials, c.seed, std::nullopt, c.threads)
        .report;
  }
  throw DomainError("unknown check id '" + id + "'");
}

/// Every grid cell in order (dims outer, pq inner). Invalid cells produce an
/// error row and the run continues.
inline std::vector<ResultRow> run_config(const ExperimentConfig& c) {
  const bool inequality = is_inequality_id(c.target);
  if (!inequality && !is_check_id(c.target)) throw ConfigError("unknown target id '" + c.target + "'");
  if (c.format != "csv" && c.format != "jsonl") throw ConfigError("unknown output format '" + c.format + "'");
  std::vector<ResultRow> rows;
  for (const auto& [m, n] : c.dims) {
    for (const auto& [p, q] : c.pq) {
      try {
        if (inequality) {
          const EnsembleSpec spec = build_spec(c, m, n);
          const BoundReport rep =
              verify_inequality(c.target, spec, PQParams(p, q), c.trials, c.seed, verify_options(c));
          rows.push_back(row_from_bound(c.experiment_id, rep, c.record_runtime));
        } else {
          rows.push_back(row_from_moment(c.experiment_id, run_moment_cell(c, m, n, p, q)));
        }
      } catch (const DomainError& e) {
        rows.push_back(error_row(c, m, n, p, q, e.what()));
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Acceptance bands.

struct Band {
  std::optional<double> max_ratio;
  std::optional<double> min_ratio;
  /// reverse12: floor on the reverse ratio.
  std::optional<double> min_reverse;
};

/// Fixed bands; corollary bands come from the calibration file.
inline std::map<std::string, Band> builtin_bands() {
  return {
      {"main11", {3.0, std::nullopt, std::nullopt}},
      {"reverse12", {std::nullopt, std::nullopt, 0.25}},
      {"lemma31", {3.0, std::nullopt, std::nullopt}},
      {"lemma32", {3.0, std::nullopt, std::nullopt}},
      {"regularity", {3.0, std::nullopt, std::nullopt}},
      {"weakstrong", {2.0, std::nullopt, std::nullopt}},
      {"tailcmp", {4.0, std::nullopt, std::nullopt}},
      {"sudakov", {20.0, 0.2, std::nullopt}},
      {"momclaim", {4.0, std::nullopt, std::nullopt}},
  };
}

/// Reads `id = max_ratio` lines (comments with '#').
inline std::map<std::string, Band> load_band_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open band file '" + path + "'");
  std::map<std::string, Band> bands;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    const std::string body = detail::trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("band file: expected id = value");
    const std::string id = detail::trim(std::string_view(body).substr(0, eq));
    bands[id].max_ratio = detail::to_double(id, detail::trim(std::string_view(body).substr(eq + 1)));
  }
  return bands;
}

/// Ratio on the unfavorable side: (lhs + 2 se) / rhs for upper checks,
/// (lhs - 2 se) / rhs for lower checks.
inline std::optional<std::string> band_violation(const ResultRow& row, const Band& band) {
  if (row.is_error()) return "error row: " + row.term1_name;
  if (!row.ratio || !std::isfinite(*row.ratio)) return std::string("ratio not finite");
  const double se = row.lhs_se.value_or(0.0);
  const double lhs = row.lhs_mean.value_or(0.0);
  const double rhs = row.rhs_bracket.value_or(0.0);
  const double hi = rhs > 0 ? (lhs + 2 * se) / rhs : *row.ratio;
  const double lo = rhs > 0 ? (lhs - 2 * se) / rhs : *row.ratio;
  if (band.max_ratio && hi > *band.max_ratio) {
    return "ratio " + format_real(hi) + " > " + format_real(*band.max_ratio);
  }
  if (band.min_ratio && lo < *band.min_ratio) {
    return "ratio " + format_real(lo) + " < " + format_real(*band.min_ratio);
  }
  if (band.min_reverse) {
    if (!row.reverse_ratio) return std::string("missing reverse ratio");
    double biggest = 0.0;
    for (const auto& t : {row.term1, row.term2, row.term3}) biggest = std::max(biggest, t.value_or(0.0));
    const double rev = biggest > 0 ? (lhs - 2 * se) / biggest : *row.reverse_ratio;
    if (rev < *band.min_reverse) {
      return "reverse ratio " + format_real(rev) + " < " + format_real(*band.min_reverse);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Registry printed by --list-ids.

struct RegistryEntry {
  std::string_view id;
  std::string_view statement;
};

inline constexpr std::array<RegistryEntry, 15> kRegistry = {{
    {"main11", "E||X||_{p'->q} <= C(p,q)[(log m)^{1/q} max_i||A_i||_p + max_j||A^(j)||_q + (log m)^{1+1/q} E max_ij|X_ij|], X_ij = A_ij Y_ij with i.i.d. isotropic log-concave rows, m >= 2, p,q >= 2"},
    {"reverse12", "E||X||_{p'->q} >= c [max_i||A_i||_p + max_j||A^(j)||_q + E max_ij|X_ij|] (lower bound, optimality up to logs)"},
    {"cor13", "E||X||_{p'->q} <= C(p,q)[(log m)^{1+1/q} E max_i||X_i||_p + E max_j||X^(j)||_q]"},
    {"prop15", "E max_i (sum_j |B_ij Y_ij|^p)^{1/p} <= C[p^2 max_i||B_i||_p + p log(m v n) E max_ij|B_ij Y_ij|]"},
    {"uncond16", "unconditional X: E||X||_{p'->q} <= C(p,q)[(log m)^{3/2+1/q} E max_i||X_i||_p + sqrt(log n) E max_j||X^(j)||_q] (improved: (log m)^{1/2+1/q})"},
    {"lemma31", "(E max_i ||X_i||_p^q)^{1/q} <= C(p,q)[max_i||A_i||_p + log m E max_ij|X_ij|]"},
    {"lemma32", "sup_{t in B_{p'}} (sum_i E|<X_i,t>|^q)^{1/q} <= C q max_j||A^(j)||_q"},
    {"mixture42", "X_ij = |Z_ij|^gamma B_ij G_ij: E||X||_{p'->q} <= C[(log m)^{1/q+gamma} max_i||B_i||_p + (log n)^gamma max_j||B^(j)||_q + (log m)^{1+1/q} E max|X_ij|], p,q >= 2 v 1/gamma (improved: last exponent 1/q)"},
    {"beta52", "beta-regular entries: E||X||_{p'->q} <= C[(log m)^{beta+1/q} max_i||A_i||_p + (log n)^beta max_j||A^(j)||_q + (log m)^{1/q} sqrt(log mn) E max|X_ij|]"},
    {"regularity", "(E f(Z)^p)^{1/p} <= C1 (p/q) (E f(Z)^q)^{1/q} for seminorms f, p >= q >= 1"},
    {"weakstrong", "(E||Z||_p^q)^{1/q} <= C p (E||Z||_p + sigma_{p,Z}(q)), sigma = sup_{t in B_{p'}} ||<t,Z>||_q"},
    {"tailcmp", "P(||Z||_p >= C3 p (u + E||Z||_p)) <= C4 sup_{t in B_{p'}} P(|<t,Z>| >= u)"},
    {"sudakov", "E max_i |a_i Z_i| >= (1/C) max_k a*_k min_i ||Z_i||_{log(k+1)}"},
    {"momclaim", "beta-regular Y: ||sum_j t_j Y_j||_r <= C L r^beta ||t||_2"},
    {"momprofile", "r^beta / L <= ||Y_ij||_r <= L r^beta (moment growth of a coordinate)"},
}};

}  // namespace lpqlab
