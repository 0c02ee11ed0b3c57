#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lecam/approx.hpp"
#include "lecam/density.hpp"
#include "lecam/equivalence.hpp"
#include "lecam/error.hpp"
#include "lecam/experiments.hpp"
#include "lecam/format.hpp"
#include "lecam/kernels.hpp"
#include "lecam/measures.hpp"
#include "lecam/parallel.hpp"
#include "lecam/rng.hpp"
#include "lecam/stats.hpp"
#include "lecam/tent.hpp"

// Monte Carlo checks of the chain's claims. Every check draws replication r
// from rng::derive(seed, <check name>, r), so reports depend only on the
// master seed, never on the thread count.

namespace lecam {

struct TestReport {
  std::string name;
  bool pass = false;
  std::string statistic_name;
  double statistic = 0.0;
  // NaN when the check is a band check rather than a hypothesis test.
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double level = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;

  void set(std::string key, double v) { values.emplace_back(std::move(key), v); }

  nlohmann::ordered_json to_json() const {
    auto num = [](double v) -> nlohmann::ordered_json {
      if (!std::isfinite(v)) return nullptr;
      return round12(v);
    };
    nlohmann::ordered_json j;
    j["test"] = name;
    j["pass"] = pass;
    j["statistic_name"] = statistic_name;
    j["statistic"] = num(statistic);
    j["p_value"] = num(p_value);
    j["level"] = num(level);
    nlohmann::ordered_json vals = nlohmann::ordered_json::object();
    for (const auto& [k, v] : values) vals[k] = num(v);
    j["values"] = vals;
    j["notes"] = notes;
    return j;
  }
};

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

struct VerifyOptions {
  // Per-test level; the suite applies Bonferroni on top.
  double level = 1e-3;
  // Width of moment bands in standard errors.
  double se_band = 4.0;
  std::size_t threads = 1;
  // Run the deliberately wrong variant of the check, which must fail.
  bool negative_control = false;
};

namespace detail {

// A density visibly different from f, used as the wrong law in negative
// controls: f mixed half and half with a steep affine density.
inline DensityModel perturbed(const DensityModel& f) {
  const double slope = f(1.0) > f(0.0) ? -0.8 : 0.8;
  return densities::mixture(0.5, f, densities::affine(slope));
}

}  // namespace detail

// Binned i.i.d. samples against direct multinomial draws, pooled over
// `datasets` independent data sets and compared by a 2 x m homogeneity
// test. The negative control draws the multinomial side from a different
// density.
inline TestReport verify_sufficiency(const DensityModel& f, std::size_t n, std::size_t m, std::size_t datasets,
                                     std::uint64_t seed, const VerifyOptions& opt = {},
                                     const std::optional<DensityModel>& multinomial_density = std::nullopt) {
  if (n < 1 || datasets < 1) throw usage_error("verify_sufficiency: n and datasets must be >= 1");
  TestReport r;
  r.name = "sufficiency";
  r.statistic_name = "chi2";
  r.level = opt.level;
  r.set("n", static_cast<double>(n));
  r.set("m", static_cast<double>(m));
  r.set("datasets", static_cast<double>(datasets));
  if (m == 1) {
    r.pass = true;
    r.p_value = 1.0;
    r.notes.push_back("single cell: counts are always (n)");
    return r;
  }
  const DensityModel other = multinomial_density ? *multinomial_density
                             : opt.negative_control ? detail::perturbed(f)
                                                    : f;
  const ThetaVector theta = theta_of(other, m);
  const auto binned = parallel_map(datasets, opt.threads, [&](std::size_t d) {
    return bin_counts(sample_iid(f, n, rng::derive(seed, "sufficiency/iid", d)), m);
  });
  const auto direct = parallel_map(datasets, opt.threads, [&](std::size_t d) {
    return sample_multinomial(n, theta.theta, rng::derive(seed, "sufficiency/multinomial", d));
  });
  Counts a(m, 0), b(m, 0);
  for (std::size_t d = 0; d < datasets; ++d)
    for (std::size_t i = 0; i < m; ++i) {
      a[i] += binned[d][i];
      b[i] += direct[d][i];
    }
  const auto chi = stats::chi_square_homogeneity(a, b);
  r.statistic = chi.statistic;
  r.p_value = chi.p_value;
  r.set("dof", chi.dof);
  if (chi.merged) r.notes.push_back("merged sparse cells into " + std::to_string(chi.cells) + " groups");
  if (opt.negative_control || multinomial_density) r.notes.push_back("multinomial side uses " + other.name);
  r.pass = chi.p_value > opt.level;
  return r;
}

// The full kernel chain applied to i.i.d. f samples, compared by KS with the
// exact CDF of the reconstruction. The negative control stops after the
// midpoint step and skips the tents.
inline TestReport verify_transport(const DensityModel& f, std::size_t n, std::size_t m, std::size_t datasets,
                                   std::uint64_t seed, const VerifyOptions& opt = {}) {
  if (n < 1 || datasets < 1) throw usage_error("verify_transport: n and datasets must be >= 1");
  const PiecewiseLinear fhat = reconstruct(f, m);
  const auto chain = transport_chain(m, n);
  const auto front = compose(binning_kernel(m, n), midpoint_kernel(m, n));
  const auto parts = parallel_map(datasets, opt.threads, [&](std::size_t d) {
    const auto x = sample_iid(f, n, rng::derive(seed, "transport/iid", d));
    const auto k = rng::derive(seed, "transport/kernel", d);
    return opt.negative_control ? front.sample(x, k) : chain.sample(x, k);
  });
  std::vector<double> pooled;
  pooled.reserve(n * datasets);
  for (const auto& p : parts) pooled.insert(pooled.end(), p.begin(), p.end());
  const auto ks = stats::ks_test(std::move(pooled), [&](double x) { return fhat.cdf(x); });
  TestReport r;
  r.name = "transport";
  r.statistic_name = "ks";
  r.statistic = ks.statistic;
  r.p_value = ks.p_value;
  r.level = opt.level;
  r.set("n", static_cast<double>(n));
  r.set("m", static_cast<double>(m));
  r.set("datasets", static_cast<double>(datasets));
  if (opt.negative_control) r.notes.push_back("reconstruction kernel skipped");
  r.pass = ks.p_value > opt.level;
  return r;
}

// Moments of the synthesized y* path. Checks, each within se_band standard
// errors:
//   E y*_t   = sum_i (\int_{J_i} sqrt f) \int_0^t V_i   at t = 1/4, 1/2, 3/4, 1
//   Var y*_t = t / (4n)                                  at the same t
//   Var of each cell increment = 1 / (4nm)
//   Cov of distinct cell increments = 0
// The negative control drops the bridge term.
inline TestReport verify_ystar_moments(const DensityModel& f, std::size_t n, std::size_t m, std::size_t replications,
                                       std::uint64_t seed, const VerifyOptions& opt = {}) {
  if (m < 2) throw usage_error("verify_ystar_moments: m must be >= 2");
  if (n < 1 || replications < 3) throw usage_error("verify_ystar_moments: need n >= 1 and >= 3 replications");
  const std::size_t res = 4 * m;
  const auto means = sqrt_cell_integrals(f, m);
  const double var_inc = 1.0 / (4.0 * static_cast<double>(n) * static_cast<double>(m));
  const TentBasis basis(m);
  const std::array<double, 4> ts{0.25, 0.5, 0.75, 1.0};

  struct Draw {
    std::array<double, 4> y{};
    std::vector<double> inc;
  };
  const auto draws = parallel_map(replications, opt.threads, [&](std::size_t r) {
    const auto ybar = sample_gaussian_vector(means, var_inc, rng::derive(seed, "ystar/increments", r));
    Trajectory path;
    if (opt.negative_control) {
      path = uniform_grid(res);
      for (std::size_t k = 0; k <= res; ++k)
        for (std::size_t i = 0; i < m; ++i) path.values[k] += ybar[i] * basis.cdf(i, path.times[k]);
    } else {
      path = synthesize_ystar(ybar, n, rng::derive(seed, "ystar/bridge", r), res);
    }
    Draw d;
    for (std::size_t q = 0; q < 4; ++q) d.y[q] = path.values[(q + 1) * m];
    d.inc = increments(path, m);
    return d;
  });

  TestReport rep;
  rep.name = "ystar_moments";
  rep.statistic_name = "max_abs_z";
  rep.set("n", static_cast<double>(n));
  rep.set("m", static_cast<double>(m));
  rep.set("replications", static_cast<double>(replications));
  rep.set("se_band", opt.se_band);
  double worst = 0.0;
  std::size_t failures = 0;
  auto check = [&](const std::string& key, double estimate, double expected, double se) {
    const double z = se > 0.0 ? std::abs(estimate - expected) / se : (estimate == expected ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    if (!(z <= opt.se_band)) ++failures;
    rep.set(key, estimate);
    rep.set(key + "_expected", expected);
  };

  for (std::size_t q = 0; q < 4; ++q) {
    stats::Moments mom;
    for (const auto& d : draws) mom.add(d.y[q]);
    double mean_expected = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean_expected += means[i] * basis.cdf(i, ts[q]);
    const std::string t = format_number(ts[q]);
    check("mean_t" + t, mom.mean(), mean_expected, mom.mean_se());
    check("var_t" + t, mom.variance(), ts[q] / (4.0 * static_cast<double>(n)), mom.variance_se());
  }
  std::vector<std::vector<double>> cols(m, std::vector<double>(replications));
  for (std::size_t r = 0; r < replications; ++r)
    for (std::size_t i = 0; i < m; ++i) cols[i][r] = draws[r].inc[i];
  double max_inc_var_dev = 0.0;
  double max_cov_z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    stats::Moments mom;
    for (double v : cols[i]) mom.add(v);
    const double z = std::abs(mom.variance() - var_inc) / mom.variance_se();
    max_inc_var_dev = std::max(max_inc_var_dev, z);
    worst = std::max(worst, z);
    if (!(z <= opt.se_band)) ++failures;
    for (std::size_t j = i + 1; j < m; ++j) {
      const auto c = stats::sample_covariance(cols[i], cols[j]);
      const double zc = std::abs(c.value) / c.se;
      max_cov_z = std::max(max_cov_z, zc);
      worst = std::max(worst, zc);
      if (!(zc <= opt.se_band)) ++failures;
    }
  }
  rep.set("increment_variance_expected", var_inc);
  rep.set("increment_variance_max_z", max_inc_var_dev);
  rep.set("increment_covariance_max_z", max_cov_z);
  rep.set("failed_checks", static_cast<double>(failures));
  rep.statistic = worst;
  if (opt.negative_control) rep.notes.push_back("bridge term dropped");
  rep.pass = failures == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Risk transfer.

// A randomized decision rule acting on observations of `space`.
struct DecisionRule {
  Space space;
  std::function<double(const std::vector<double>&, std::uint64_t)> act;

  double operator()(const std::vector<double>& y, std::uint64_t seed) const { return act(y, seed); }
};

struct DecisionProblem {
  std::string action_space = "R";
  // L(theta, z), required to lie in [0,1].
  std::function<double(double, double)> loss;
  std::function<double(const DensityModel&)> target;
};

// theta_1 = \int_0^{1/m} f under the loss min(1, n (z - theta_1)^2).
inline DecisionProblem theta1_problem(std::size_t n, std::size_t m) {
  const double nd = static_cast<double>(n);
  return {.action_space = "[0,1]",
          .loss = [nd](double theta, double z) { return std::min(1.0, nd * (z - theta) * (z - theta)); },
          .target = [m](const DensityModel& f) { return theta_of(f, m)[0]; }};
}

// Fraction of the n observations in [0, 1/m).
inline DecisionRule first_cell_fraction_rule(std::size_t n, std::size_t m) {
  return {spaces::unit_interval(n), [m](const std::vector<double>& y, std::uint64_t) {
            const double edge = 1.0 / static_cast<double>(m);
            const auto hits = std::count_if(y.begin(), y.end(), [edge](double x) { return x < edge; });
            return static_cast<double>(hits) / static_cast<double>(y.size());
          }};
}

inline DecisionRule constant_rule(std::size_t n, double action) {
  return {spaces::unit_interval(n), [action](const std::vector<double>&, std::uint64_t) { return action; }};
}

// rho_1(y) = rho_2(K(y)): the sampled realization of \int rho_2(x, .) K(y, dx).
template <class In, class LI, class LO>
DecisionRule transfer_rule(const DecisionRule& rule, const MarkovKernel<In, std::vector<double>, LI, LO>& kernel) {
  if (!(kernel.target() == rule.space))
    throw usage_error("transfer_rule: kernel target " + kernel.target().str() + " does not match rule space " +
                      rule.space.str());
  return {kernel.source(), [rule, kernel](const std::vector<double>& y, std::uint64_t seed) {
            return rule(kernel.sample(y, rng::derive(seed, "transfer/kernel")), rng::derive(seed, "transfer/rule"));
          }};
}

// Source: n i.i.d. f draws with the rule transferred through the transport
// chain. Target: n i.i.d. f draws with the original rule. The gap must stay
// below the TV surrogate min(1, sqrt(H^2(f^n, fhat^n))) plus se_band
// combined standard errors. The surrogate is an upper bound on the exact TV,
// so this is weaker than the displayed inequality.
inline TestReport verify_risk_transfer(const DecisionProblem& problem, const DensityModel& f, std::size_t n,
                                       std::size_t m, std::size_t replications, std::uint64_t seed,
                                       const VerifyOptions& opt = {},
                                       std::optional<DecisionRule> rule = std::nullopt) {
  if (replications < 2) throw usage_error("verify_risk_transfer: need >= 2 replications");
  const DecisionRule target_rule = rule ? *rule : first_cell_fraction_rule(n, m);
  const DecisionRule source_rule = transfer_rule(target_rule, transport_chain(m, n));
  const double theta = problem.target(f);
  auto loss = [&](double z) {
    const double l = problem.loss(theta, z);
    if (!(l >= 0.0 && l <= 1.0)) throw domain_error("verify_risk_transfer: loss outside [0,1]");
    return l;
  };
  const auto losses = parallel_map(replications, opt.threads, [&](std::size_t r) {
    const auto y_src = sample_iid(f, n, rng::derive(seed, "risk/source", r));
    const auto y_tgt = sample_iid(f, n, rng::derive(seed, "risk/target", r));
    return std::pair{loss(source_rule(y_src, rng::derive(seed, "risk/source_rule", r))),
                     loss(target_rule(y_tgt, rng::derive(seed, "risk/target_rule", r)))};
  });
  stats::Moments src, tgt;
  for (const auto& [a, b] : losses) {
    src.add(a);
    tgt.add(b);
  }
  const RiskEstimate rs{src.mean(), src.mean_se(), replications};
  const RiskEstimate rt{tgt.mean(), tgt.mean_se(), replications};
  const double h2 = hellinger_sq_reconstruction(f, m).value;
  const double h2n = hellinger_sq_power(std::clamp(h2, 0.0, 2.0), n);
  const double tv_bound = std::min(1.0, tv_sandwich(h2n).upper);
  const double combined_se = std::hypot(rs.std_error, rt.std_error);
  const double gap = std::abs(rs.value - rt.value);

  TestReport rep;
  rep.name = "risk_transfer";
  rep.statistic_name = "risk_gap";
  rep.statistic = gap;
  rep.set("n", static_cast<double>(n));
  rep.set("m", static_cast<double>(m));
  rep.set("replications", static_cast<double>(replications));
  rep.set("theta", theta);
  rep.set("risk_source", rs.value);
  rep.set("risk_source_se", rs.std_error);
  rep.set("risk_target", rt.value);
  rep.set("risk_target_se", rt.std_error);
  rep.set("sqrt_n_hellinger", std::sqrt(static_cast<double>(n) * h2));
  rep.set("tv_bound", tv_bound);
  rep.set("allowed_gap", tv_bound + opt.se_band * combined_se);
  rep.notes.push_back("TV bound is the Hellinger surrogate, weaker than the exact TV");
  rep.pass = gap <= tv_bound + opt.se_band * combined_se;
  return rep;
}

// ---------------------------------------------------------------------------
// Rate sweep.

struct SweepRow {
  std::size_t n = 0;
  std::size_t m = 0;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool exact_zero = false;
  std::optional<stats::LinearFit> fit;
  double expected_slope = 0.0;
  // Exponent p in H^2(f, fhat_m) ~ m^{-p}.
  double hellinger_exponent = 0.0;
  std::string dominant_term;
  double tolerance = 0.2;

  bool pass() const { return exact_zero || (fit && std::abs(fit->slope - expected_slope) <= tolerance); }
};

// The exponent p in H^2(f, fhat_m) ~ m^{-p}: the flat boundary pieces cost
// m^{-3} unless f'(0) = f'(1) = 0, the interior costs m^{-2 gamma - 2} with
// gamma the density's own class exponent.
inline std::pair<double, std::string> reconstruction_exponent(const DensityModel& f) {
  const double interior = std::min(4.0, 2.0 * f.cls.gamma + 2.0);
  const bool boundary = std::abs(f.derivative_at(0.0)) > 1e-8 || std::abs(f.derivative_at(1.0)) > 1e-8;
  if (boundary && interior > 3.0) return {3.0, "boundary m^-3"};
  return {interior, interior >= 4.0 ? "interior m^-4" : "interior m^-(2 gamma + 2)"};
}

// For each n: m = choose_m(n, gamma), measured = sqrt(n) H(f, fhat_m),
// bound = bound_density_reconstruction. The log-log slope of the measured
// column should equal 1/2 - p / (2 (2 + gamma)). Deterministic; the seed is
// accepted for interface symmetry with the Monte Carlo checks.
inline SweepResult rate_sweep(const DensityModel& f, double gamma, std::vector<std::size_t> n_grid,
                              std::uint64_t /*seed*/ = 0, std::size_t threads = 1) {
  if (n_grid.size() < 4) throw usage_error("rate_sweep: need at least 4 grid points");
  std::sort(n_grid.begin(), n_grid.end());
  SweepResult out;
  const auto rows = parallel_map(n_grid.size(), threads, [&](std::size_t k) {
    SweepRow row;
    row.n = n_grid[k];
    row.m = choose_m(row.n, gamma);
    double h2 = hellinger_sq_reconstruction(f, row.m).value;
    // Below this the quadrature only sees rounding noise.
    if (h2 < 1e-24) h2 = 0.0;
    row.measured = std::sqrt(static_cast<double>(row.n) * h2);
    row.bound = bound_density_reconstruction(
        {.n = static_cast<double>(row.n), .m = static_cast<double>(row.m), .gamma = gamma});
    row.ratio = row.measured / row.bound;
    return row;
  });
  out.rows = rows;
  const auto [p, term] = reconstruction_exponent(f);
  out.hellinger_exponent = p;
  out.dominant_term = term;
  out.expected_slope = 0.5 - p / (2.0 * (2.0 + gamma));
  out.exact_zero = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.measured == 0.0; });
  if (!out.exact_zero) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.measured <= 0.0) continue;
      x.push_back(std::log(static_cast<double>(r.n)));
      y.push_back(std::log(r.measured));
    }
    if (x.size() >= 3) out.fit = stats::least_squares(x, y);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s) {
  os << "n,m,measured,bound,ratio\n";
  for (const auto& r : s.rows)
    os << r.n << ',' << r.m << ',' << format_number(r.measured) << ',' << format_number(r.bound) << ','
       << format_number(r.ratio) << '\n';
}

inline TestReport sweep_report(const SweepResult& s) {
  TestReport r;
  r.name = "rate_sweep";
  r.statistic_name = "slope";
  r.statistic = s.fit ? s.fit->slope : 0.0;
  r.set("expected_slope", s.expected_slope);
  r.set("tolerance", s.tolerance);
  r.set("hellinger_exponent", s.hellinger_exponent);
  if (s.fit) {
    r.set("slope_ci_low", s.fit->ci_low);
    r.set("slope_ci_high", s.fit->ci_high);
  }
  r.notes.push_back("dominant term: " + s.dominant_term);
  if (s.exact_zero) r.notes.push_back("measured column identically zero; slope undefined");
  r.pass = s.pass();
  return r;
}

}  // namespace lecam
