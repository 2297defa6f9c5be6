#pragma once

// Experiment harness: builds GP covariance matrices, runs estimators over
// parameter sweeps and writes one BenchRecord per (value, trial, algorithm).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rstar/estimators.hpp"
#include "rstar/kernels.hpp"
#include "rstar/rational.hpp"

namespace rstar::bench {

struct RunConfig {
  KernelSpec kernel{};
  std::size_t n = 1000;
  std::size_t d = 1;
  EstimatorConfig estimator{};
  /// The Cholesky reference is skipped above this size.
  std::size_t exact_cutoff = 5000;
};

struct BenchRecord {
  std::string kernel_family;
  std::size_t n = 0;
  std::size_t d = 0;
  double jitter = 0.0;
  std::string algorithm;
  std::string probe_kind;
  std::size_t s = 0;
  std::size_t t = 0;
  std::string lanczos_metric;
  std::string precond_kind;
  std::size_t precond_rank = 0;
  std::size_t precond_iters = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  std::optional<double> exact;
  std::optional<double> abs_error;
  double wall_time_ms = 0.0;
  /// Empty unless the run failed.
  std::string error;

  /// Equality over every field except wall_time_ms.
  bool same_result(const BenchRecord& other) const;
  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

/// Column names, in CSV order.
const std::vector<std::string>& record_fields();

/// Index points come from Rng(seed).child(0); the estimator uses the same seed
/// for its own streams.
DenseSymMatrix build_matrix(const RunConfig& cfg);

/// Builds the matrix, times the estimator (preconditioner build included,
/// matrix construction excluded) and compares with Cholesky when n is at or
/// below exact_cutoff. Estimator failures become records with `error` set.
BenchRecord run_single(const RunConfig& cfg);

/// Runs several algorithms on one matrix so they are compared on identical
/// inputs. Records come back in the order of `algorithms`.
std::vector<BenchRecord> run_paired(const RunConfig& cfg, const std::vector<Algorithm>& algorithms);

struct SweepSpec {
  /// One of: n, d, precond-rank, precond-iters, probes, lanczos-iters,
  /// probe-kind, precond, lanczos-metric.
  std::string parameter;
  std::vector<std::string> values;
  RunConfig base{};
  std::vector<Algorithm> algorithms{Algorithm::R3};
  std::size_t trials = 20;
  std::uint64_t seed_base = 0;
  std::size_t jobs = 1;

  void validate() const;
};

/// Applies one sweep value to a config. Throws InvalidArgument on an unknown
/// parameter or unparsable value.
void apply_sweep_value(RunConfig& cfg, const std::string& parameter, const std::string& value);

/// Seed for trial `trial` at sweep position `value_index`.
std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t value_index, std::size_t trial);

using RecordSink = std::function<void(const BenchRecord&)>;

/// Cartesian product values x trials x algorithms. Trials run on up to `jobs`
/// threads; records reach `sink` and the returned vector ordered by
/// (value index, trial index, algorithm index) whatever the completion order.
std::vector<BenchRecord> run_sweep(const SweepSpec& spec, const RecordSink& sink = {});

// ---- serialization ----------------------------------------------------------

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const BenchRecord& r);
void emit_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
std::vector<BenchRecord> parse_csv(std::istream& in);

std::string to_json(const std::vector<BenchRecord>& records, int indent = 2);
void emit_json(const std::vector<BenchRecord>& records, const std::filesystem::path& path);
std::vector<BenchRecord> parse_json(const std::string& text);

std::string to_plain(const BenchRecord& r);

// ---- self-check -------------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

/// Decomposition tables re-derived from the closed forms must match `tables`
/// to `tolerance` (absolute) in offset, every pole and every residue.
CheckResult check_partial_fraction_table(const std::vector<RationalPartialFraction>& tables, double tolerance);
CheckResult check_antisymmetry();
CheckResult check_partial_vs_closed();
CheckResult check_multishift_exactness();
CheckResult check_woodbury();
CheckResult check_determinant_lemma();

/// Runs every check; `table_tolerance` applies to the decomposition table
/// comparison only.
VerifyReport verify(double table_tolerance = 1e-12);

}  // namespace rstar::bench
