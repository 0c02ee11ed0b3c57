#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lecam/approx.hpp"
#include "lecam/density.hpp"
#include "lecam/equivalence.hpp"
#include "lecam/error.hpp"
#include "lecam/experiments.hpp"
#include "lecam/format.hpp"
#include "lecam/harness.hpp"
#include "lecam/kernels.hpp"
#include "lecam/measures.hpp"

namespace lecam::cli {

enum ExitCode : int { ok = 0, check_failed = 1, usage = 2, numerical = 3 };

struct RunConfig {
  std::string command;
  std::string density = "cosine";
  std::size_t n = 1000;
  std::optional<std::size_t> m;
  bool auto_m = false;
  std::optional<double> gamma, K, eps, M;
  std::optional<std::uint64_t> seed;
  std::size_t reps = 10000;
  std::size_t datasets = 1;
  std::string out;
  std::string format;
  std::size_t parallel = 1;
  bool negative_control = false;
};

namespace detail {

// Builds the density and applies class overrides, then checks membership.
inline DensityModel resolve_density(const RunConfig& cfg) {
  DensityModel f = densities::from_spec(cfg.density);
  if (cfg.gamma) f.cls.gamma = *cfg.gamma;
  if (cfg.K) f.cls.K = *cfg.K;
  if (cfg.eps) f.cls.eps = *cfg.eps;
  if (cfg.M) f.cls.M = *cfg.M;
  f.cls.validate();
  const ClassCheck chk = check_class(f);
  if (!chk.ok) throw usage_error("density '" + cfg.density + "' is not in the requested class: " + chk.diagnostic);
  return f;
}

inline std::size_t resolve_m(const RunConfig& cfg, const DensityModel& f) {
  if (cfg.m && !cfg.auto_m) {
    if (*cfg.m < 2) throw usage_error("--m must be >= 2");
    return *cfg.m;
  }
  return choose_m(std::max<std::size_t>(cfg.n, 2), f.cls.gamma);
}

inline std::uint64_t require_seed(const RunConfig& cfg) {
  if (!cfg.seed) throw usage_error(cfg.command + ": --seed is required");
  return *cfg.seed;
}

inline std::vector<std::size_t> parse_counts(std::string_view text) {
  std::vector<std::size_t> out;
  for (double v : densities::parse_numbers(text)) {
    if (!(v >= 0.0) || v != std::floor(v)) throw usage_error("counts must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

inline NormalSpec parse_normal(const std::string& text) {
  const auto v = densities::parse_numbers(text);
  if (v.size() != 2) throw usage_error("--normal expects mean,variance");
  NormalSpec s{v[0], v[1]};
  if (!(s.variance > 0.0) || !std::isfinite(s.variance)) throw usage_error("--normal: variance must be positive");
  return s;
}

// Writes to --out when given, else to the command's stdout.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw usage_error("cannot open output file '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

}  // namespace detail

inline int cmd_distance(const std::vector<std::string>& normals, const std::vector<std::string>& dens,
                        const std::string& metric_name, const RunConfig& cfg, std::ostream& out) {
  const Metric metric = parse_metric(metric_name);
  if (normals.size() + dens.size() != 2 || (!normals.empty() && !dens.empty()))
    throw usage_error("distance: give exactly two --normal or two --density specs");
  DistanceReport r;
  if (normals.size() == 2) {
    r = distance_normal(metric, detail::parse_normal(normals[0]), detail::parse_normal(normals[1]));
  } else {
    const DensityModel f = densities::from_spec(dens[0]);
    const DensityModel g = densities::from_spec(dens[1]);
    const auto bps = quad::merge_breakpoints(f.kinks, g.kinks, 0.0, 1.0);
    r = distance_quadrature(metric, f.eval, g.eval, 0.0, 1.0, bps, 8, {.abs_tol = 1e-12});
  }
  detail::Sink sink(cfg.out, out);
  if (cfg.format == "csv") {
    sink.stream() << "metric,value,method,abs_error\n"
                  << to_string(r.metric) << ',' << format_number(r.value) << ',' << to_string(r.method) << ','
                  << format_number(r.abs_error) << '\n';
  } else {
    nlohmann::ordered_json j;
    j["metric"] = to_string(r.metric);
    j["value"] = round12(r.value);
    j["method"] = to_string(r.method);
    j["abs_error"] = round12(r.abs_error);
    sink.stream() << j.dump() << '\n';
  }
  return ok;
}

inline int cmd_sweep(const std::vector<std::size_t>& grid, const RunConfig& cfg, std::ostream& out) {
  const DensityModel f = detail::resolve_density(cfg);
  const auto seed = detail::require_seed(cfg);
  const SweepResult s = rate_sweep(f, f.cls.gamma, grid, seed, cfg.parallel);
  detail::Sink sink(cfg.out, out);
  if (cfg.format == "json") {
    for (const auto& r : s.rows) {
      nlohmann::ordered_json j;
      j["n"] = r.n;
      j["m"] = r.m;
      j["measured"] = round12(r.measured);
      j["bound"] = round12(r.bound);
      j["ratio"] = round12(r.ratio);
      sink.stream() << j.dump() << '\n';
    }
    sink.stream() << sweep_report(s).to_json().dump() << '\n';
  } else {
    write_sweep_csv(sink.stream(), s);
  }
  return ok;
}

// The default suite: sufficiency and transport on `datasets` pooled samples
// of size n, y* moments and risk transfer with `reps` replications, and the
// deterministic rate sweep. Emits one JSON line per check plus a summary.
inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.format == "csv") throw usage_error("verify: reports are JSON lines only");
  const DensityModel f = detail::resolve_density(cfg);
  const auto seed = detail::require_seed(cfg);
  const std::size_t m = detail::resolve_m(cfg, f);
  VerifyOptions opt{.threads = cfg.parallel, .negative_control = cfg.negative_control};
  // Three hypothesis tests share a 0.5% family-wise budget.
  const std::size_t tests = 3;
  opt.level = 0.005 / static_cast<double>(tests);

  std::vector<TestReport> reports;
  reports.push_back(verify_sufficiency(f, cfg.n, m, cfg.datasets, rng::derive(seed, "verify/sufficiency"), opt));
  reports.push_back(verify_transport(f, cfg.n, m, cfg.datasets, rng::derive(seed, "verify/transport"), opt));
  reports.push_back(verify_ystar_moments(f, cfg.n, m, cfg.reps, rng::derive(seed, "verify/ystar"), opt));
  reports.push_back(
      verify_risk_transfer(theta1_problem(cfg.n, m), f, cfg.n, m, cfg.reps, rng::derive(seed, "verify/risk"), opt));
  std::vector<std::size_t> grid;
  for (int k = 10; k <= 18; ++k) grid.push_back(std::size_t{1} << k);
  reports.push_back(sweep_report(rate_sweep(f, f.cls.gamma, grid, seed, cfg.parallel)));

  detail::Sink sink(cfg.out, out);
  bool all = true;
  for (const auto& r : reports) {
    sink.stream() << r.to_json().dump() << '\n';
    all = all && r.pass;
  }
  nlohmann::ordered_json summary;
  summary["suite"] = "verify";
  summary["density"] = f.name;
  summary["n"] = cfg.n;
  summary["m"] = m;
  summary["seed"] = seed;
  summary["reps"] = cfg.reps;
  summary["negative_control"] = cfg.negative_control;
  summary["per_test_level"] = round12(opt.level);
  summary["pass"] = all;
  sink.stream() << summary.dump() << '\n';
  return all ? ok : check_failed;
}

// Pushes an i.i.d. sample (read from --in or drawn from --density) or a
// count vector (--counts) through the kernel chain and writes the result,
// one value per line.
inline int cmd_transport(const std::string& in_path, const std::string& counts_text, const RunConfig& cfg,
                         std::ostream& out) {
  const auto seed = detail::require_seed(cfg);
  std::vector<double> result;
  if (!counts_text.empty()) {
    const Counts counts = detail::parse_counts(counts_text);
    if (counts.size() < 2) throw usage_error("--counts needs at least two cells");
    const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    result = counts_transport(counts.size(), n).sample(counts, rng::derive(seed, "transport/kernel"));
  } else {
    std::vector<double> sample;
    std::size_t m = 0;
    if (!in_path.empty()) {
      std::ifstream is(in_path);
      if (!is) throw usage_error("cannot open input file '" + in_path + "'");
      sample = read_sample(is);
      if (sample.empty()) throw usage_error("input file '" + in_path + "' holds no sample");
      for (double x : sample)
        if (!(x >= 0.0 && x <= 1.0)) throw usage_error("input sample must lie in [0,1]");
      RunConfig c = cfg;
      c.n = sample.size();
      m = c.m && !c.auto_m ? *c.m : choose_m(std::max<std::size_t>(c.n, 2), cfg.gamma.value_or(1.0));
      if (m < 2) throw usage_error("--m must be >= 2");
    } else {
      const DensityModel f = detail::resolve_density(cfg);
      m = detail::resolve_m(cfg, f);
      sample = sample_iid(f, cfg.n, rng::derive(seed, "transport/iid"));
    }
    result = transport_chain(m, sample.size()).sample(sample, rng::derive(seed, "transport/kernel"));
  }
  detail::Sink sink(cfg.out, out);
  write_sample(sink.stream(), result);
  return ok;
}

inline int cmd_reconstruct(const RunConfig& cfg, std::ostream& out) {
  const DensityModel f = detail::resolve_density(cfg);
  const std::size_t m = detail::resolve_m(cfg, f);
  const ErrorBreakdown e = hellinger_bound(f, m);
  detail::Sink sink(cfg.out, out);
  if (cfg.format == "json") {
    nlohmann::ordered_json j;
    j["m"] = m;
    j["l2_sq"] = round12(e.l2_sq);
    j["hellinger_sq"] = round12(e.hellinger_sq);
    j["hellinger_sq_bound"] = round12(e.hellinger_sq_bound);
    j["sup_remainder"] = round12(e.sup_remainder);
    j["remainder_bound"] = round12(remainder_bound(f.cls, m));
    sink.stream() << j.dump() << '\n';
  } else {
    const PiecewiseLinear g = reconstruct(f, m);
    sink.stream() << "x,f,fhat\n";
    for (double x : g.knots())
      sink.stream() << format_number(x) << ',' << format_number(f(x)) << ',' << format_number(g(x)) << '\n';
  }
  return ok;
}

inline int cmd_bound(double carter, const RunConfig& cfg, std::ostream& out) {
  const double gamma = cfg.gamma.value_or(1.0);
  const std::size_t m = cfg.m && !cfg.auto_m ? *cfg.m : choose_m(cfg.n, gamma);
  const ChainBound b = chain_bound(cfg.n, m, gamma, carter);
  const ChainBound best = optimal_chain_bound(cfg.n, gamma, carter);
  detail::Sink sink(cfg.out, out);
  nlohmann::ordered_json j;
  j["n"] = cfg.n;
  j["m"] = m;
  j["density_multinomial"] = round12(b.density_multinomial);
  j["multinomial_gaussian"] = round12(b.multinomial_gaussian);
  j["coords_increments"] = round12(b.coords_increments);
  j["increments_white_noise"] = round12(b.increments_white_noise);
  j["total"] = round12(b.total());
  j["best_m"] = static_cast<std::size_t>(best.m);
  j["best_total"] = round12(best.total());
  j["stated_rate"] = round12(stated_rate(cfg.n, gamma));
  sink.stream() << j.dump() << '\n';
  return ok;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Le Cam chain toolkit: distances, reconstructions, kernel transport, verification, rate sweeps"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub, bool sampling) {
    sub->add_option("--density", cfg.density, "uniform | cosine[:a1,a2,a3] | affine:a")->capture_default_str();
    sub->add_option("--n", cfg.n, "sample size")->capture_default_str();
    auto* mo = sub->add_option("--m", cfg.m, "bin count");
    sub->add_flag("--auto-m", cfg.auto_m, "m = floor(n^(1/(2+gamma)))")->excludes(mo);
    sub->add_option("--gamma", cfg.gamma, "Hölder exponent in (0,1]");
    sub->add_option("--K", cfg.K, "Hölder constant");
    sub->add_option("--eps", cfg.eps, "lower density bound");
    sub->add_option("--M", cfg.M, "upper density bound");
    sub->add_option("--out", cfg.out, "output path (default stdout)");
    sub->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    if (sampling) {
      sub->add_option("--seed", cfg.seed, "master seed (required)");
      sub->add_option("--parallel", cfg.parallel, "worker threads; output does not depend on it")
          ->capture_default_str()
          ->check(CLI::PositiveNumber);
    }
  };

  std::vector<std::string> normals, dens;
  std::string metric = "hellinger-sq";
  auto* distance = app.add_subcommand("distance", "distance between two laws");
  distance->add_option("--normal", normals, "mean,variance (give twice)");
  distance->add_option("--density", dens, "density on [0,1] (give twice)");
  distance->add_option("--metric", metric, "tv | hellinger | hellinger-sq | l1 | l2")->capture_default_str();
  distance->add_option("--out", cfg.out, "output path");
  distance->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  std::vector<std::size_t> grid;
  for (int k = 10; k <= 18; ++k) grid.push_back(std::size_t{1} << k);
  auto* sweep = app.add_subcommand("sweep", "sqrt(n) H(f, fhat_m) at m = choose_m(n) over an n grid (CSV)");
  add_common(sweep, true);
  sweep->add_option("--n-grid", grid, "sample sizes, comma separated (default 2^10..2^18)")->delimiter(',');

  auto* verify = app.add_subcommand(
      "verify",
      "run the verification suite, JSON lines. With n=1000 and --reps 10000 a single thread takes tens of "
      "seconds; runtime grows linearly in n * reps");
  add_common(verify, true);
  verify->add_option("--reps", cfg.reps, "Monte Carlo replications for moment and risk checks")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{3}, std::size_t{100000000}));
  verify->add_option("--datasets", cfg.datasets, "pooled samples for the sufficiency and transport tests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_flag("--negative-control", cfg.negative_control, "run deliberately wrong variants; must fail");

  std::string in_path, counts_text;
  auto* transport = app.add_subcommand("transport", "push a sample through bin -> midpoints -> tents");
  add_common(transport, true);
  transport->add_option("--in", in_path, "sample file, one value per line");
  transport->add_option("--counts", counts_text, "bin counts c1,c2,...,cm instead of a sample");

  auto* recon = app.add_subcommand("reconstruct", "tent reconstruction and its error");
  add_common(recon, false);

  double carter = 1.0;
  auto* bound = app.add_subcommand("bound", "per-link Le Cam distance bounds");
  bound->add_option("--n", cfg.n)->capture_default_str();
  auto* bm = bound->add_option("--m", cfg.m);
  bound->add_flag("--auto-m", cfg.auto_m)->excludes(bm);
  bound->add_option("--gamma", cfg.gamma);
  bound->add_option("--carter", carter, "Carter constant C_R")->capture_default_str();
  bound->add_option("--out", cfg.out);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return usage;
  }

  try {
    if (distance->parsed()) {
      cfg.command = "distance";
      return cmd_distance(normals, dens, metric, cfg, out);
    }
    if (sweep->parsed()) {
      cfg.command = "sweep";
      return cmd_sweep(grid, cfg, out);
    }
    if (verify->parsed()) {
      cfg.command = "verify";
      return cmd_verify(cfg, out);
    }
    if (transport->parsed()) {
      cfg.command = "transport";
      return cmd_transport(in_path, counts_text, cfg, out);
    }
    if (recon->parsed()) {
      cfg.command = "reconstruct";
      return cmd_reconstruct(cfg, out);
    }
    if (bound->parsed()) {
      cfg.command = "bound";
      if (cfg.gamma) HolderClass{.gamma = *cfg.gamma}.validate();
      return cmd_bound(carter, cfg, out);
    }
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return usage;
  } catch (const domain_error& e) {
    err << "domain error: " << e.what() << '\n';
    return usage;
  } catch (const numerical_error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical;
  }
  return usage;
}

}  // namespace lecam::cli
