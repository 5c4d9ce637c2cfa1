#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <lpqlab/lpqlab.hpp>

namespace {

using namespace lpqlab;

constexpr int kExitConfig = 2;
constexpr int kExitBand = 3;

// Flag values; only those actually given on the command line are applied.
struct Flags {
  std::string config;
  std::string id;
  std::string check;
  std::string family;
  long long m = 16;
  long long n = 16;
  double p = 2.0;
  double q = 2.0;
  double gamma = 1.0;
  double beta = 0.5;
  double L = 1.0;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t restarts = 8;
  unsigned threads = 0;
  std::string out = "-";
  std::string format = "csv";
  bool improved = false;
  bool assert_bands = false;
  std::string band_file;
};

struct Options {
  CLI::Option* config = nullptr;
  CLI::Option* family = nullptr;
  CLI::Option* m = nullptr;
  CLI::Option* n = nullptr;
  CLI::Option* p = nullptr;
  CLI::Option* q = nullptr;
  CLI::Option* gamma = nullptr;
  CLI::Option* beta = nullptr;
  CLI::Option* L = nullptr;
  CLI::Option* trials = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* restarts = nullptr;
  CLI::Option* threads = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* format = nullptr;
  CLI::Option* improved = nullptr;
};

Options add_common(CLI::App* app, Flags& f, bool with_config) {
  Options o;
  if (with_config) o.config = app->add_option("--config", f.config, "Experiment config file");
  o.family = app->add_option("--family", f.family, "Ensemble family");
  o.m = app->add_option("--m", f.m, "Rows");
  o.n = app->add_option("--n", f.n, "Columns");
  o.p = app->add_option("--p", f.p, "Exponent p (domain is l_{p'})");
  o.q = app->add_option("--q", f.q, "Exponent q (target is l_q)");
  o.gamma = app->add_option("--gamma", f.gamma, "Mixture exponent");
  o.beta = app->add_option("--beta", f.beta, "Moment growth exponent");
  o.L = app->add_option("--L", f.L, "Moment growth constant");
  o.trials = app->add_option("--trials", f.trials, "Monte Carlo trials");
  o.seed = app->add_option("--seed", f.seed, "64-bit seed");
  o.restarts = app->add_option("--restarts", f.restarts, "Random restarts");
  o.threads = app->add_option("--threads", f.threads, "Worker threads (0 = hardware)");
  o.out = app->add_option("--out", f.out, "Output path, - for stdout");
  o.format = app->add_option("--format", f.format, "csv or jsonl");
  o.improved = app->add_flag("--improved-exponents", f.improved, "Use the sharper exponents");
  return o;
}

bool given(const CLI::Option* o) { return o != nullptr && o->count() > 0; }

// file < LPQLAB_SEED < command line
ExperimentConfig build_config(const Flags& f, const Options& o) {
  ExperimentConfig c;
  if (given(o.config)) c = load_config(f.config);
  apply_env(c);
  if (given(o.family)) c.family = detail::to_family("--family", f.family);
  if (given(o.m) || given(o.n)) {
    const long long m = given(o.m) ? f.m : c.dims.front().first;
    const long long n = given(o.n) ? f.n : c.dims.front().second;
    c.dims = {{m, n}};
  }
  if (given(o.p) || given(o.q)) {
    const double p = given(o.p) ? f.p : c.pq.front().first;
    const double q = given(o.q) ? f.q : c.pq.front().second;
    c.pq = {{p, q}};
  }
  if (given(o.gamma)) c.gamma = f.gamma;
  if (given(o.beta)) c.beta = f.beta;
  if (given(o.L)) c.L = f.L;
  if (given(o.trials)) c.trials = f.trials;
  if (given(o.seed)) c.seed = f.seed;
  if (given(o.restarts)) c.restarts = f.restarts;
  if (given(o.threads)) c.threads = f.threads;
  if (given(o.out)) c.out = f.out;
  if (given(o.format)) c.format = f.format;
  if (given(o.improved)) c.improved_exponents = f.improved;
  if (c.dims.empty() || c.pq.empty()) throw ConfigError("empty dims or pq grid");
  return c;
}

int run_rows(const ExperimentConfig& c, const Flags& f) {
  const auto rows = run_config(c);
  emit_results(rows, c.out, c.format);
  for (const auto& row : rows) {
    if (row.is_error()) {
      std::cerr << "cell failed: m=" << row.m.value_or(0) << " n=" << row.n.value_or(0) << ": "
                << row.term1_name << "\n";
      return kExitConfig;
    }
  }
  if (!f.assert_bands) return 0;
  auto bands = builtin_bands();
  if (!f.band_file.empty()) {
    for (const auto& [id, band] : load_band_file(f.band_file)) bands[id] = band;
  }
  int status = 0;
  for (const auto& row : rows) {
    const auto it = bands.find(row.inequality_id);
    if (it == bands.end()) {
      std::cerr << "no band for " << row.inequality_id << "\n";
      status = kExitBand;
      continue;
    }
    if (const auto why = band_violation(row, it->second)) {
      std::cerr << "band violation: " << row.inequality_id << " m=" << row.m.value_or(0)
                << " n=" << row.n.value_or(0) << ": " << *why << "\n";
      status = kExitBand;
    }
  }
  return status;
}

void print_matrix(const Matrix& x) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::cout << (j ? "," : "") << format_real(x(i, j));
    }
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixed-norm random matrix experiments"};
  app.require_subcommand(0, 1);
  bool list_ids = false;
  app.add_flag("--list-ids", list_ids, "Print the inequality and check registry");

  Flags f;
  auto* sample = app.add_subcommand("sample", "Draw one structured matrix and print it as CSV");
  const Options sample_opts = add_common(sample, f, false);

  auto* opnorm = app.add_subcommand("opnorm", "Estimate ||X||_{p'->q} for one sampled matrix");
  const Options opnorm_opts = add_common(opnorm, f, false);

  auto* verify = app.add_subcommand("verify", "Check one inequality");
  const Options verify_opts = add_common(verify, f, true);
  verify->add_option("--id", f.id, "Inequality id")->required();

  auto* moments = app.add_subcommand("moments", "Run one moment check");
  const Options moments_opts = add_common(moments, f, true);
  moments->add_option("--check", f.check, "Check id")->required();

  auto* sweep = app.add_subcommand("sweep", "Run every grid cell of a config file");
  Options sweep_opts = add_common(sweep, f, true);
  sweep_opts.config->required();

  for (auto* sub : {verify, moments, sweep}) {
    sub->add_flag("--assert", f.assert_bands, "Exit 3 if a ratio leaves its acceptance band");
    sub->add_option("--bands", f.band_file, "Extra band file (id = max ratio)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (list_ids) {
      for (const auto& entry : kRegistry) std::cout << entry.id << "\t" << entry.statement << "\n";
      return 0;
    }
    if (*sample || *opnorm) {
      const Options& o = *sample ? sample_opts : opnorm_opts;
      const ExperimentConfig c = build_config(f, o);
      const auto [m, n] = c.dims.front();
      const EnsembleSpec spec = build_spec(c, m, n);
      Stream rng = derive_substream(c.seed, 0);
      const Matrix x = sample_structured_matrix(spec, rng);
      if (*sample) {
        print_matrix(x);
        return 0;
      }
      const PQParams pq(c.pq.front().first, c.pq.front().second);
      PowerOptions po = verify_options(c).mc.power;
      const NormEstimate est = power_iterate_lower(x, pq, po, rng);
      std::cout << "lower," << format_real(est.lower) << "\n"
                << "upper," << format_real(est.upper) << "\n"
                << "starts," << est.restarts_used << "\n"
                << "iterations," << est.iterations << "\n"
                << "converged," << (est.converged ? "true" : "false") << "\n"
                << "witness";
      for (Eigen::Index j = 0; j < est.witness.size(); ++j) std::cout << "," << format_real(est.witness(j));
      std::cout << "\n";
      return 0;
    }
    if (*verify) {
      ExperimentConfig c = build_config(f, verify_opts);
      c.target = f.id;
      if (!is_inequality_id(c.target)) throw ConfigError("unknown inequality id '" + c.target + "'");
      return run_rows(c, f);
    }
    if (*moments) {
      ExperimentConfig c = build_config(f, moments_opts);
      c.target = f.check;
      if (!is_check_id(c.target)) throw ConfigError("unknown check id '" + c.target + "'");
      return run_rows(c, f);
    }
    if (*sweep) return run_rows(build_config(f, sweep_opts), f);
    std::cout << app.help();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
