// rstar: log-determinant estimation CLI.
//
//   rstar logdet --kernel matern52 --n 2000 --d 5 --algorithm r3
//   rstar bench  --sweep d --values 1,5,20 --trials 20 --algorithms r3,slq --out d.csv
//   rstar verify

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rstar/bench.hpp"
#include "rstar/errors.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct BaseOptions {
  std::string kernel = "rbf";
  std::size_t n = 1000;
  std::size_t d = 1;
  double jitter = 1e-6;
  std::string algorithm = "r3";
  std::size_t probes = 35;
  std::string probe_kind = "rademacher";
  std::size_t lanczos_iters = 20;
  std::string lanczos_metric = "preconditioned";
  std::string precond = "rand-svd";
  std::size_t precond_rank = 25;
  std::size_t precond_iters = 5;
  double scaling = -1.0;  // negative: use jitter
  std::uint64_t seed = 0;
  std::size_t exact_cutoff = 5000;

  void add_to(CLI::App& app, bool with_algorithm) {
    app.add_option("--kernel", kernel, "Covariance kernel")->check(CLI::IsMember({"rbf", "matern52"}));
    app.add_option("--n", n, "Matrix size")->check(CLI::PositiveNumber);
    app.add_option("--d", d, "Index-point dimension")->check(CLI::PositiveNumber);
    app.add_option("--jitter", jitter, "Diagonal jitter")->check(CLI::NonNegativeNumber);
    if (with_algorithm) {
      app.add_option("--algorithm", algorithm, "Estimator")
          ->check(CLI::IsMember({"r1", "r3", "r5", "slq", "exact"}));
    }
    app.add_option("--probes", probes, "Probe vector count")->check(CLI::PositiveNumber);
    app.add_option("--probe-kind", probe_kind, "Probe distribution")
        ->check(CLI::IsMember({"rademacher", "gaussian", "normal-orthogonal"}));
    app.add_option("--lanczos-iters", lanczos_iters, "Lanczos iterations")->check(CLI::PositiveNumber);
    app.add_option("--lanczos-metric", lanczos_metric, "Lanczos inner product on M P^-1")
        ->check(CLI::IsMember({"preconditioned", "euclidean"}));
    app.add_option("--precond", precond, "Preconditioner kind")
        ->check(CLI::IsMember({"identity", "diagonal", "rank-one", "partial-cholesky", "partial-cholesky-scaled",
                               "trunc-svd", "trunc-svd-scaled", "rand-svd", "rand-svd-scaled"}));
    app.add_option("--precond-rank", precond_rank, "Preconditioner rank");
    app.add_option("--precond-iters", precond_iters, "Randomized SVD iterations")->check(CLI::PositiveNumber);
    app.add_option("--precond-scaling", scaling, "Base a for the *-scaled kinds (default: jitter)");
    app.add_option("--seed", seed, "Random seed");
    app.add_option("--exact-cutoff", exact_cutoff, "Skip the Cholesky reference above this n");
  }

  rstar::bench::RunConfig to_config() const {
    rstar::bench::RunConfig cfg;
    cfg.kernel.family = rstar::parse_kernel_family(kernel);
    cfg.kernel.jitter = jitter;
    cfg.n = n;
    cfg.d = d;
    cfg.exact_cutoff = exact_cutoff;
    auto& e = cfg.estimator;
    e.algorithm = rstar::parse_algorithm(algorithm);
    e.probes = probes;
    e.probe_kind = rstar::parse_probe_kind(probe_kind);
    e.lanczos_iters = lanczos_iters;
    e.lanczos_metric = rstar::parse_lanczos_metric(lanczos_metric);
    e.precond.kind = rstar::parse_preconditioner_kind(precond);
    e.precond.rank = precond_rank;
    e.precond.num_iters = precond_iters;
    e.precond.scaling = scaling > 0.0 ? scaling : (jitter > 0.0 ? jitter : 1e-6);
    e.seed = seed;
    return cfg;
  }
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

int run_logdet(const BaseOptions& opts, const std::string& format) {
  const auto record = rstar::bench::run_single(opts.to_config());
  if (format == "csv") {
    rstar::bench::write_csv_header(std::cout);
    rstar::bench::write_csv_row(std::cout, record);
  } else if (format == "json") {
    std::cout << rstar::bench::to_json({record}) << '\n';
  } else {
    std::cout << rstar::bench::to_plain(record);
  }
  return record.error.empty() ? 0 : kExitFailure;
}

int run_bench(const BaseOptions& opts, const std::string& sweep, const std::vector<std::string>& values,
              std::size_t trials, const std::vector<std::string>& algorithms, const std::string& out_path,
              std::size_t jobs) {
  rstar::bench::SweepSpec spec;
  spec.parameter = sweep;
  spec.values = values;
  spec.base = opts.to_config();
  spec.trials = trials;
  spec.jobs = jobs;
  spec.seed_base = opts.seed;
  spec.algorithms.clear();
  for (const auto& a : algorithms) spec.algorithms.push_back(rstar::parse_algorithm(a));
  spec.validate();

  std::size_t failures = 0;
  std::vector<rstar::bench::BenchRecord> records;
  if (ends_with(out_path, ".json")) {
    records = rstar::bench::run_sweep(spec, [&](const auto& r) {
      if (!r.error.empty()) ++failures;
      std::cerr << "." << std::flush;
    });
    rstar::bench::emit_json(records, out_path);
  } else {
    std::ofstream file;
    if (out_path != "-") {
      file.open(out_path);
      if (!file) throw rstar::Error("cannot open '" + out_path + "' for writing");
    }
    std::ostream& out = out_path == "-" ? std::cout : file;
    rstar::bench::write_csv_header(out);
    records = rstar::bench::run_sweep(spec, [&](const auto& r) {
      if (!r.error.empty()) ++failures;
      rstar::bench::write_csv_row(out, r);
      out.flush();
      std::cerr << "." << std::flush;
    });
    if (!out) throw rstar::Error("write to '" + out_path + "' failed");
  }
  std::cerr << "\n" << records.size() << " records written to " << (out_path == "-" ? "stdout" : out_path);
  if (failures) std::cerr << " (" << failures << " failed)";
  std::cerr << "\n";
  return failures ? kExitFailure : 0;
}

int run_verify(double tolerance) {
  const auto report = rstar::bench::verify(tolerance);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << "  " << c.detail << '\n';
  }
  std::cout << report.checks.size() << " checks, " << (report.all_passed() ? "all passed" : "FAILURES") << '\n';
  return report.all_passed() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic log-determinant estimation with rational approximations"};
  app.require_subcommand(1);

  BaseOptions logdet_opts;
  std::string format = "plain";
  auto* logdet = app.add_subcommand("logdet", "Estimate log det of one kernel matrix");
  logdet_opts.add_to(*logdet, true);
  logdet->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json", "plain"}));

  BaseOptions bench_opts;
  std::string sweep;
  std::vector<std::string> values;
  std::size_t trials = 20;
  std::vector<std::string> algorithms{"r1", "r3", "r5", "slq"};
  std::string out_path;
  std::size_t jobs = 1;
  auto* bench = app.add_subcommand("bench", "Run a parameter sweep and write CSV or JSON records");
  bench_opts.add_to(*bench, false);
  bench->add_option("--sweep", sweep, "Swept parameter")
      ->required()
      ->check(CLI::IsMember(
          {"n", "d", "precond-rank", "precond-iters", "probes", "lanczos-iters", "probe-kind", "precond", "lanczos-metric"}));
  bench->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  bench->add_option("--trials", trials, "Random kernels per value")->check(CLI::PositiveNumber);
  bench->add_option("--algorithms", algorithms, "Comma-separated algorithms")
      ->delimiter(',')
      ->check(CLI::IsMember({"r1", "r3", "r5", "slq", "exact"}));
  bench->add_option("--out", out_path, "Output path (.json for JSON, CSV otherwise; - for CSV on stdout)")->required();
  bench->add_option("--jobs", jobs, "Trials run in parallel")->check(CLI::PositiveNumber);

  double tolerance = 1e-12;
  auto* verify = app.add_subcommand("verify", "Run the built-in consistency checks");
  verify->add_option("--tolerance", tolerance, "Absolute tolerance for the decomposition table check")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*logdet) return run_logdet(logdet_opts, format);
    if (*bench) return run_bench(bench_opts, sweep, values, trials, algorithms, out_path, jobs);
    if (*verify) return run_verify(tolerance);
  } catch (const rstar::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
