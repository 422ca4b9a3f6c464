// Command-line front end: evaluates the rate-distortion, dispersion, and
// finite-blocklength bound curves of the Gauss-Markov source and runs the
// Monte Carlo experiments, writing deterministic CSV.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmrd/bounds.hpp"
#include "gmrd/csv.hpp"
#include "gmrd/estimator.hpp"
#include "gmrd/params.hpp"
#include "gmrd/source.hpp"
#include "gmrd/spectrum.hpp"
#include "gmrd/stats.hpp"
#include "gmrd/tilted.hpp"
#include "gmrd/waterfill.hpp"

namespace {

using gmrd::CsvWriter;
using gmrd::SourceParams;

struct Options {
  double a = 0.5;
  double sigma2 = 1.0;
  double d = 0.25;
  double eps = 0.1;
  double alpha = 1.0;
  double p = 50.0;
  double eta = 0.1;
  double c = 0.125;  // Hanson-Wright universal constant is unknown; label it
  double gamma = -1.0;  // < 0 means the (1/2) log n default
  std::int64_t n = 0;
  std::vector<std::int64_t> n_list;
  std::vector<double> d_list;
  std::vector<std::int64_t> m_list;
  std::int64_t trials = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

std::string render_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Output sink: file when --out is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::domain_error("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void cmd_rdf(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const gmrd::CriticalPoints cp = gmrd::critical_points(params);
  std::vector<double> grid = opt.d_list;
  if (grid.empty())
    for (int i = 1; i <= 49; ++i) grid.push_back(cp.d_max * i / 50.0);
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"d", "rate_gm", "rate_iid", "theta"});
  for (double d : grid) {
    const gmrd::WaterfillPoint wf = gmrd::limiting_solve_from_d(params, d);
    const auto [rate_iid, v_iid] = gmrd::iid_reference(params, d);
    (void)v_iid;
    csv.row().col(d).col(wf.rate).col(rate_iid).col(wf.theta);
  }
}

void cmd_dispersion(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const gmrd::CriticalPoints cp = gmrd::critical_points(params);
  std::vector<double> thetas;
  if (opt.d_list.empty()) {
    for (int i = 1; i <= 40; ++i) {
      const double d = cp.d_max * i / 41.0;
      thetas.push_back(gmrd::limiting_solve_from_d(params, d).theta);
    }
  } else {
    for (double d : opt.d_list) thetas.push_back(gmrd::limiting_solve_from_d(params, d).theta);
  }
  thetas.push_back(cp.theta_min);  // P1
  thetas.push_back(cp.theta_max);  // P2
  // Vertical segment: d stays at d_max while the level keeps rising.
  for (double f : {1.25, 1.6, 2.0, 3.0, 5.0}) thetas.push_back(cp.theta_max * f);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"d", "theta", "V"});
  for (double theta : thetas) {
    const gmrd::WaterfillPoint wf = gmrd::limiting_solve_from_theta(params, theta);
    csv.row().col(wf.d).col(wf.theta).col(wf.dispersion);
  }
}

void cmd_nth_order(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  std::vector<std::int64_t> ns = opt.n_list;
  if (ns.empty()) ns = {16, 32, 64, 128, 256, 512};
  const gmrd::WaterfillPoint lim = gmrd::limiting_solve_from_d(params, opt.d);
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"n", "theta_n", "rate_n", "active_count", "rate_limiting", "n_abs_rate_gap", "d_n"});
  for (std::int64_t n : ns) {
    const gmrd::EigenSpectrum spec = gmrd::exact_eigenvalues(params, static_cast<int>(n));
    const gmrd::WaterfillPoint wf = gmrd::nth_order_solve(spec, opt.d);
    const double d_n = gmrd::nth_order_d_from_theta(spec, lim.theta);
    csv.row()
        .col(n)
        .col(wf.theta)
        .col(wf.rate)
        .col(wf.active_count)
        .col(lim.rate)
        .col(n * std::abs(wf.rate - lim.rate))
        .col(d_n);
  }
}

void cmd_eigen_check(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const std::int64_t n = opt.n > 0 ? opt.n : 100;
  const gmrd::EigenSpectrum spec = gmrd::exact_eigenvalues(params, static_cast<int>(n));
  const double bound = 2.0 * params.a * 3.1415926535897932385 / static_cast<double>(n);
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"i", "mu", "xi", "gap", "bound"});
  for (int i = 0; i < spec.n; ++i)
    csv.row().col(i + 1).col(spec.mu(i)).col(spec.xi(i)).col(spec.xi(i) - spec.mu(i)).col(bound);
}

void cmd_tilted_mc(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const std::int64_t n = opt.n > 0 ? opt.n : 512;
  const gmrd::EigenSpectrum spec = gmrd::exact_eigenvalues(params, static_cast<int>(n));
  const gmrd::TiltedStats st =
      gmrd::tilted_mc(spec, opt.d, opt.trials, gmrd::RngStream(opt.seed, 1));
  const gmrd::WaterfillPoint lim = gmrd::limiting_solve_from_d(params, opt.d);
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"n", "d", "theta_n", "mean_closed_per_n", "mc_mean_per_n", "mc_mean_stderr_per_n",
              "var_closed_per_n", "mc_var_per_n", "mc_var_stderr_per_n", "v_limiting", "trials"});
  const double dn = static_cast<double>(n);
  csv.row()
      .col(st.n)
      .col(st.d)
      .col(st.theta_n)
      .col(st.mean_closed / dn)
      .col(st.mc_mean / dn)
      .col(st.mc_mean_stderr / dn)
      .col(st.var_closed / dn)
      .col(st.mc_var / dn)
      .col(st.mc_var_stderr / dn)
      .col(lim.dispersion)
      .col(st.mc_count);
}

void cmd_mle(const Options& opt, bool alpha_mode) {
  const SourceParams params(opt.a, opt.sigma2);
  std::vector<std::int64_t> ns = opt.n_list;
  if (ns.empty()) ns = {500, 1000, 2000};
  const auto reports =
      alpha_mode
          ? gmrd::mle_error_experiment_alpha(params, ns, opt.alpha, opt.trials, opt.c,
                                             gmrd::RngStream(opt.seed, 2))
          : gmrd::mle_error_experiment(params, ns, opt.eta, opt.trials, opt.c,
                                       gmrd::RngStream(opt.seed, 2));
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"n", "eta", "trials", "exceed_freq", "wilson_lo", "wilson_hi", "envelope", "c",
              "c1", "c2"});
  for (const auto& r : reports)
    csv.row()
        .col(r.n)
        .col(r.eta)
        .col(r.trials)
        .col(r.exceed_freq)
        .col(r.wilson_lo)
        .col(r.wilson_hi)
        .col(r.envelope)
        .col(opt.c)
        .col(r.c1)
        .col(r.c2);
}

void cmd_bounds(const Options& opt, bool with_converse_mc) {
  const SourceParams params(opt.a, opt.sigma2);
  std::vector<std::int64_t> ns = opt.n_list;
  if (ns.empty()) ns = {100, 200, 400, 800};
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  std::vector<std::string> cols = {"n", "gaussian_approx", "geometric_converse"};
  if (with_converse_mc) {
    cols.push_back("converse_eps_lb");
    cols.push_back("converse_eps_stderr");
  }
  csv.header(cols);
  for (std::int64_t n : ns) {
    const double ga = gmrd::gaussian_approx_rate(params, opt.d, opt.eps, n);
    const double geo = gmrd::geometric_converse_rate(params, opt.d, opt.eps, n);
    auto row = csv.row();
    row.col(n).col(ga).col(geo);
    if (with_converse_mc) {
      const gmrd::EigenSpectrum spec = gmrd::exact_eigenvalues(params, static_cast<int>(n));
      const double gamma = opt.gamma > 0.0 ? opt.gamma : 0.5 * std::log(static_cast<double>(n));
      const gmrd::ConverseEpsBound b = gmrd::general_converse_eps(
          spec, opt.d, ga * static_cast<double>(n), gamma, opt.trials,
          gmrd::RngStream(opt.seed, 3 + static_cast<std::uint64_t>(n)));
      row.col(b.eps_lower).col(b.stderr_est);
    }
  }
}

void cmd_typical_set(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const std::int64_t n = opt.n > 0 ? opt.n : 512;
  const gmrd::Decorrelator dec(params, static_cast<int>(n));
  gmrd::RngStream rng(opt.seed, 5);
  std::int64_t members = 0, est_fail = 0, mean_fail = 0, moment_fail = 0;
  for (std::int64_t t = 0; t < opt.trials; ++t) {
    const Eigen::VectorXd u = gmrd::sample_block(params, static_cast<int>(n), rng);
    const gmrd::TypicalSetResult r =
        gmrd::typical_set_member(params, dec, opt.d, opt.alpha, opt.p, u);
    members += r.member;
    est_fail += r.estimate_residual > 0.0;
    mean_fail += r.mean_distortion_residual > 0.0;
    moment_fail += (r.moment_residuals[0] > 0.0 || r.moment_residuals[1] > 0.0 ||
                    r.moment_residuals[2] > 0.0);
  }
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"n", "d", "alpha", "p", "trials", "member_freq", "estimate_fail_freq",
              "mean_distortion_fail_freq", "moment_fail_freq"});
  const double tr = static_cast<double>(opt.trials);
  csv.row()
      .col(n)
      .col(opt.d)
      .col(opt.alpha)
      .col(opt.p)
      .col(opt.trials)
      .col(members / tr)
      .col(est_fail / tr)
      .col(mean_fail / tr)
      .col(moment_fail / tr);
}

void cmd_random_code(const Options& opt) {
  const SourceParams params(opt.a, opt.sigma2);
  const std::int64_t n = opt.n > 0 ? opt.n : 8;
  const gmrd::EigenSpectrum spec = gmrd::exact_eigenvalues(params, static_cast<int>(n));
  std::vector<std::int64_t> ms = opt.m_list;
  if (ms.empty())
    for (std::int64_t m = 1; m <= 4096; m *= 2) ms.push_back(m);
  Sink sink(opt.out);
  CsvWriter csv(sink.stream());
  csv.header({"M", "rate", "eps_hat", "wilson_lo", "wilson_hi", "trials"});
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const gmrd::RandomCodeResult r = gmrd::simulate_random_code(
        spec, opt.d, ms[i], opt.trials, gmrd::RngStream(opt.seed, 4 + static_cast<std::uint64_t>(i)));
    csv.row()
        .col(r.m)
        .col(std::log(static_cast<double>(r.m)) / static_cast<double>(n))
        .col(r.eps_hat)
        .col(r.wilson_lo)
        .col(r.wilson_hi)
        .col(r.trials);
  }
}

// Config file support: JSON object whose keys mirror the long flags. Values
// from the file apply only where the command line did not set the flag.
std::vector<std::string> merge_config_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw std::domain_error("cannot open config file: " + config_path);
  nlohmann::json j = nlohmann::json::parse(in);
  if (!j.is_object()) throw std::domain_error("config file must hold a JSON object");
  auto flag_present = [&](const std::string& name) {
    const std::string full = "--" + name;
    for (const auto& a : args)
      if (a == full || a.rfind(full + "=", 0) == 0) return true;
    return false;
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (flag_present(it.key())) continue;
    std::string value;
    if (it.value().is_string()) {
      value = it.value().get<std::string>();
    } else if (it.value().is_array()) {
      for (const auto& v : it.value()) {
        if (!value.empty()) value += ',';
        value += v.is_number_integer() ? std::to_string(v.get<std::int64_t>())
                                       : render_double(v.get<double>());
      }
    } else if (it.value().is_number_integer()) {
      value = std::to_string(it.value().get<std::int64_t>());
    } else if (it.value().is_number_float()) {
      value = render_double(it.value().get<double>());
    } else if (it.value().is_boolean()) {
      value = it.value().get<bool>() ? "true" : "false";
    } else {
      throw std::domain_error("config key '" + it.key() + "' has an unsupported value type");
    }
    args.push_back("--" + it.key() + "=" + value);
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-blocklength rate-distortion toolkit for the Gauss-Markov source"};
  app.require_subcommand(1);

  Options opt;
  std::string config_path;  // consumed before CLI11 parse; registered for --help only

  auto add_common = [&](CLI::App* cmd, bool stochastic) {
    cmd->add_option("--a", opt.a, "gain, 0 <= a < 1");
    cmd->add_option("--sigma2", opt.sigma2, "innovation variance");
    cmd->add_option("--out", opt.out, "output CSV path (default: stdout)");
    cmd->add_option("--config", config_path, "JSON config file; flags override");
    if (stochastic) {
      cmd->add_option("--trials", opt.trials, "Monte Carlo trials");
      cmd->add_option("--seed", opt.seed, "RNG seed (required: runs must be reproducible)")
          ->required();
    }
  };

  CLI::App* rdf = app.add_subcommand("rdf", "rate-distortion function vs the innovation reference");
  add_common(rdf, false);
  rdf->add_option("--d-list", opt.d_list, "distortion grid")->delimiter(',');

  CLI::App* disp = app.add_subcommand("dispersion", "dispersion-distortion curve with corner points");
  add_common(disp, false);
  disp->add_option("--d-list", opt.d_list, "distortion grid")->delimiter(',');

  CLI::App* nth = app.add_subcommand("nth-order", "n-th order reverse waterfilling vs the limit");
  add_common(nth, false);
  nth->add_option("--d", opt.d, "distortion");
  nth->add_option("--n-list", opt.n_list, "blocklengths")->delimiter(',');

  CLI::App* eig = app.add_subcommand("eigen-check", "eigenvalues vs Toeplitz surrogates");
  add_common(eig, false);
  eig->add_option("--n", opt.n, "blocklength");

  CLI::App* tmc = app.add_subcommand("tilted-mc", "tilted-information moments, closed form vs MC");
  add_common(tmc, true);
  tmc->add_option("--d", opt.d, "distortion");
  tmc->add_option("--n", opt.n, "blocklength");

  CLI::App* mle = app.add_subcommand("mle", "gain-estimator error frequencies vs envelope");
  add_common(mle, true);
  mle->add_option("--eta", opt.eta, "fixed error threshold");
  CLI::Option* alpha_opt = mle->add_option("--alpha", opt.alpha, "shrinking-threshold mode");
  mle->add_option("--c", opt.c, "envelope constant");
  mle->add_option("--n-list", opt.n_list, "blocklengths")->delimiter(',');

  CLI::App* bnd = app.add_subcommand("bounds", "finite-blocklength bound curves");
  add_common(bnd, false);
  bnd->add_option("--d", opt.d, "distortion");
  bnd->add_option("--eps", opt.eps, "excess-distortion probability");
  bnd->add_option("--n-list", opt.n_list, "blocklengths")->delimiter(',');
  CLI::Option* bnd_trials = bnd->add_option("--trials", opt.trials, "adds the info-spectrum converse");
  CLI::Option* bnd_seed = bnd->add_option("--seed", opt.seed, "RNG seed");
  bnd->add_option("--gamma", opt.gamma, "converse slack (default (1/2) log n)");
  bnd_trials->needs(bnd_seed);
  bnd_seed->needs(bnd_trials);

  CLI::App* rc = app.add_subcommand("random-code", "random-codebook excess-distortion simulation");
  add_common(rc, true);
  rc->add_option("--d", opt.d, "distortion");
  rc->add_option("--n", opt.n, "blocklength (<= 16)");
  rc->add_option("--m-list", opt.m_list, "codebook sizes")->delimiter(',');

  CLI::App* ts = app.add_subcommand("typical-set", "estimator-typical-set membership frequencies");
  add_common(ts, true);
  ts->add_option("--d", opt.d, "distortion");
  ts->add_option("--n", opt.n, "blocklength (>= 3)");
  ts->add_option("--alpha", opt.alpha, "threshold constant in eta_n");
  ts->add_option("--p", opt.p, "slack multiplier for the distortion-mean condition");

  try {
    const std::vector<std::string> raw = merge_config_args(argc, argv);
    std::vector<std::string> reversed(raw.rbegin(), raw.rend());
    app.parse(reversed);  // CLI11 consumes back-to-front
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (rdf->parsed()) cmd_rdf(opt);
    if (disp->parsed()) cmd_dispersion(opt);
    if (nth->parsed()) cmd_nth_order(opt);
    if (eig->parsed()) cmd_eigen_check(opt);
    if (tmc->parsed()) cmd_tilted_mc(opt);
    if (mle->parsed()) cmd_mle(opt, alpha_opt->count() > 0);
    if (bnd->parsed()) cmd_bounds(opt, bnd_trials->count() > 0);
    if (rc->parsed()) cmd_random_code(opt);
    if (ts->parsed()) cmd_typical_set(opt);
  } catch (const gmrd::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
