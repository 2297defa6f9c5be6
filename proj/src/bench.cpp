#include "rstar/bench.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>

#include "rstar/errors.hpp"

namespace rstar::bench {

namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BenchRecord record_skeleton(const RunConfig& cfg, Algorithm algorithm) {
  BenchRecord r;
  r.kernel_family = std::string(to_string(cfg.kernel.family));
  r.n = cfg.n;
  r.d = cfg.d;
  r.jitter = cfg.kernel.jitter;
  r.algorithm = std::string(to_string(algorithm));
  r.probe_kind = std::string(to_string(cfg.estimator.probe_kind));
  r.s = cfg.estimator.probes;
  r.t = cfg.estimator.lanczos_iters;
  r.lanczos_metric = std::string(to_string(cfg.estimator.lanczos_metric));
  r.precond_kind = std::string(to_string(cfg.estimator.precond.kind));
  r.precond_rank = cfg.estimator.precond.rank;
  r.precond_iters = cfg.estimator.precond.num_iters;
  r.seed = cfg.estimator.seed;
  r.estimate = kNaN;
  return r;
}

std::size_t parse_count(const std::string& parameter, const std::string& value) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(value, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != value.size() || value.front() == '-') {
    throw InvalidArgument("sweep " + parameter + ": '" + value + "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Splits one CSV record; handles quoted fields with embedded separators.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  for (int ch; (ch = in.get()) != EOF;) {
    any = true;
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (any) fields.push_back(std::move(field));
  return any;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

json record_to_json(const BenchRecord& r) {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : json(nullptr); };
  return json{{"kernel_family", r.kernel_family},
              {"n", r.n},
              {"d", r.d},
              {"jitter", num(r.jitter)},
              {"algorithm", r.algorithm},
              {"probe_kind", r.probe_kind},
              {"s", r.s},
              {"t", r.t},
              {"lanczos_metric", r.lanczos_metric},
              {"precond_kind", r.precond_kind},
              {"precond_rank", r.precond_rank},
              {"precond_iters", r.precond_iters},
              {"seed", r.seed},
              {"estimate", num(r.estimate)},
              {"exact", opt(r.exact)},
              {"abs_error", opt(r.abs_error)},
              {"wall_time_ms", num(r.wall_time_ms)},
              {"error", r.error}};
}

BenchRecord record_from_json(const json& j) {
  auto num = [](const json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  auto opt = [](const json& v) { return v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()); };
  BenchRecord r;
  r.kernel_family = j.at("kernel_family").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.d = j.at("d").get<std::size_t>();
  r.jitter = num(j.at("jitter"));
  r.algorithm = j.at("algorithm").get<std::string>();
  r.probe_kind = j.at("probe_kind").get<std::string>();
  r.s = j.at("s").get<std::size_t>();
  r.t = j.at("t").get<std::size_t>();
  r.lanczos_metric = j.at("lanczos_metric").get<std::string>();
  r.precond_kind = j.at("precond_kind").get<std::string>();
  r.precond_rank = j.at("precond_rank").get<std::size_t>();
  r.precond_iters = j.at("precond_iters").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.estimate = num(j.at("estimate"));
  r.exact = opt(j.at("exact"));
  r.abs_error = opt(j.at("abs_error"));
  r.wall_time_ms = num(j.at("wall_time_ms"));
  r.error = j.at("error").get<std::string>();
  return r;
}

}  // namespace

bool BenchRecord::same_result(const BenchRecord& other) const {
  BenchRecord a = *this;
  BenchRecord b = other;
  a.wall_time_ms = b.wall_time_ms = 0.0;
  // NaN estimates (failed runs) compare equal to each other.
  if (std::isnan(a.estimate) && std::isnan(b.estimate)) a.estimate = b.estimate = 0.0;
  return a == b;
}

const std::vector<std::string>& record_fields() {
  static const std::vector<std::string> fields = {
      "kernel_family", "n",     "d",         "jitter",       "algorithm",    "probe_kind",
      "s",             "t",     "lanczos_metric", "precond_kind", "precond_rank", "precond_iters",
      "seed",          "estimate", "exact",  "abs_error",    "wall_time_ms", "error"};
  return fields;
}

DenseSymMatrix build_matrix(const RunConfig& cfg) {
  Rng rng = Rng(cfg.estimator.seed).child(0);
  const IndexPoints pts = sample_index_points(cfg.n, cfg.d, rng);
  return build_covariance(cfg.kernel, pts);
}

std::vector<BenchRecord> run_paired(const RunConfig& cfg, const std::vector<Algorithm>& algorithms) {
  std::vector<BenchRecord> records;
  for (Algorithm a : algorithms) records.push_back(record_skeleton(cfg, a));

  std::optional<DenseSymMatrix> m;
  try {
    m.emplace(build_matrix(cfg));
  } catch (const std::exception& e) {
    for (BenchRecord& r : records) r.error = std::string("matrix construction failed: ") + e.what();
    return records;
  }

  std::optional<double> exact;
  std::string exact_error;
  if (cfg.n <= cfg.exact_cutoff) {
    try {
      exact = cholesky_logdet(*m);
    } catch (const std::exception& e) {
      exact_error = std::string("exact reference failed: ") + e.what();
    }
  }

  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    BenchRecord& r = records[i];
    EstimatorConfig ecfg = cfg.estimator;
    ecfg.algorithm = algorithms[i];
    try {
      const LogDetEstimate est = estimate_logdet(*m, ecfg);
      r.estimate = est.value;
      r.wall_time_ms = 1e3 * est.wall_time.count();
      if (exact) {
        r.exact = *exact;
        r.abs_error = std::abs(est.value - *exact);
      }
      r.error = exact_error;
    } catch (const std::exception& e) {
      r.error = e.what();
      if (exact) r.exact = *exact;
    }
  }
  return records;
}

BenchRecord run_single(const RunConfig& cfg) { return run_paired(cfg, {cfg.estimator.algorithm}).front(); }

void SweepSpec::validate() const {
  if (values.empty()) throw InvalidArgument("sweep: value list is empty");
  if (trials < 1) throw InvalidArgument("sweep: trials must be >= 1");
  if (algorithms.empty()) throw InvalidArgument("sweep: algorithm list is empty");
  if (jobs < 1) throw InvalidArgument("sweep: jobs must be >= 1");
  RunConfig probe = base;
  for (const std::string& v : values) apply_sweep_value(probe, parameter, v);
}

void apply_sweep_value(RunConfig& cfg, const std::string& parameter, const std::string& value) {
  if (parameter == "n") {
    cfg.n = parse_count(parameter, value);
  } else if (parameter == "d") {
    cfg.d = parse_count(parameter, value);
  } else if (parameter == "precond-rank") {
    cfg.estimator.precond.rank = parse_count(parameter, value);
  } else if (parameter == "precond-iters") {
    cfg.estimator.precond.num_iters = parse_count(parameter, value);
  } else if (parameter == "probes") {
    cfg.estimator.probes = parse_count(parameter, value);
  } else if (parameter == "lanczos-iters") {
    cfg.estimator.lanczos_iters = parse_count(parameter, value);
  } else if (parameter == "probe-kind") {
    cfg.estimator.probe_kind = parse_probe_kind(value);
  } else if (parameter == "lanczos-metric") {
    cfg.estimator.lanczos_metric = parse_lanczos_metric(value);
  } else if (parameter == "precond") {
    cfg.estimator.precond.kind = parse_preconditioner_kind(value);
  } else {
    throw InvalidArgument("unknown sweep parameter '" + parameter + "'");
  }
}

std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t value_index, std::size_t trial) {
  return Rng(seed_base).child(value_index).child(trial).seed();
}

std::vector<BenchRecord> run_sweep(const SweepSpec& spec, const RecordSink& sink) {
  spec.validate();
  const std::size_t tasks = spec.values.size() * spec.trials;
  std::vector<std::vector<BenchRecord>> slots(tasks);
  std::vector<bool> done(tasks, false);
  std::size_t flushed = 0;
  std::mutex mutex;
  std::exception_ptr sink_error;

#pragma omp parallel for schedule(dynamic, 1) num_threads(static_cast<int>(spec.jobs))
  for (std::size_t task = 0; task < tasks; ++task) {
    const std::size_t vi = task / spec.trials;
    const std::size_t trial = task % spec.trials;
    RunConfig cfg = spec.base;
    apply_sweep_value(cfg, spec.parameter, spec.values[vi]);
    cfg.estimator.seed = trial_seed(spec.seed_base, vi, trial);
    auto records = run_paired(cfg, spec.algorithms);

    const std::lock_guard lock(mutex);
    slots[task] = std::move(records);
    done[task] = true;
    while (flushed < tasks && done[flushed]) {
      if (sink && !sink_error) {
        try {
          for (const BenchRecord& r : slots[flushed]) sink(r);
        } catch (...) {
          sink_error = std::current_exception();
        }
      }
      ++flushed;
    }
  }
  if (sink_error) std::rethrow_exception(sink_error);

  std::vector<BenchRecord> out;
  out.reserve(tasks * spec.algorithms.size());
  for (auto& slot : slots)
    for (auto& r : slot) out.push_back(std::move(r));
  return out;
}

void write_csv_header(std::ostream& out) {
  const auto& fields = record_fields();
  for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
  out << '\n';
}

void write_csv_row(std::ostream& out, const BenchRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << csv_escape(r.kernel_family) << ',' << r.n << ',' << r.d << ',' << format_double(r.jitter) << ','
      << csv_escape(r.algorithm) << ',' << csv_escape(r.probe_kind) << ',' << r.s << ',' << r.t << ','
      << csv_escape(r.lanczos_metric) << ','
      << csv_escape(r.precond_kind) << ',' << r.precond_rank << ',' << r.precond_iters << ',' << r.seed << ','
      << format_double(r.estimate) << ',' << opt(r.exact) << ',' << opt(r.abs_error) << ','
      << format_double(r.wall_time_ms) << ',' << csv_escape(r.error) << '\n';
}

void emit_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_csv_header(out);
  for (const BenchRecord& r : records) write_csv_row(out, r);
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::vector<BenchRecord> parse_csv(std::istream& in) {
  std::vector<std::string> fields;
  if (!read_csv_record(in, fields)) throw InvalidArgument("parse_csv: missing header");
  if (fields != record_fields()) throw InvalidArgument("parse_csv: header does not match BenchRecord fields");
  std::vector<BenchRecord> records;
  while (read_csv_record(in, fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != record_fields().size()) {
      throw InvalidArgument("parse_csv: row " + std::to_string(records.size() + 1) + " has " +
                            std::to_string(fields.size()) + " fields");
    }
    auto count = [&](std::size_t i) { return static_cast<std::size_t>(std::stoull(fields[i])); };
    auto opt = [&](std::size_t i) {
      return fields[i].empty() ? std::nullopt : std::optional<double>(parse_double(fields[i]));
    };
    BenchRecord r;
    r.kernel_family = fields[0];
    r.n = count(1);
    r.d = count(2);
    r.jitter = parse_double(fields[3]);
    r.algorithm = fields[4];
    r.probe_kind = fields[5];
    r.s = count(6);
    r.t = count(7);
    r.lanczos_metric = fields[8];
    r.precond_kind = fields[9];
    r.precond_rank = count(10);
    r.precond_iters = count(11);
    r.seed = std::stoull(fields[12]);
    r.estimate = parse_double(fields[13]);
    r.exact = opt(14);
    r.abs_error = opt(15);
    r.wall_time_ms = parse_double(fields[16]);
    r.error = fields[17];
    records.push_back(std::move(r));
  }
  return records;
}

std::string to_json(const std::vector<BenchRecord>& records, int indent) {
  json arr = json::array();
  for (const BenchRecord& r : records) arr.push_back(record_to_json(r));
  return arr.dump(indent);
}

void emit_json(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << to_json(records) << '\n';
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

std::vector<BenchRecord> parse_json(const std::string& text) {
  const json arr = json::parse(text);
  if (!arr.is_array()) throw InvalidArgument("parse_json: expected an array");
  std::vector<BenchRecord> records;
  for (const json& j : arr) records.push_back(record_from_json(j));
  return records;
}

std::string to_plain(const BenchRecord& r) {
  std::ostringstream out;
  out << "kernel      " << r.kernel_family << " (n=" << r.n << ", d=" << r.d
      << ", jitter=" << format_double(r.jitter) << ")\n"
      << "algorithm   " << r.algorithm << " (s=" << r.s << ", t=" << r.t << ", probes=" << r.probe_kind
      << ", lanczos=" << r.lanczos_metric << ")\n"
      << "precond     " << r.precond_kind << " (rank=" << r.precond_rank << ", iters=" << r.precond_iters << ")\n"
      << "seed        " << r.seed << '\n'
      << "estimate    " << format_double(r.estimate) << '\n';
  if (r.exact) out << "exact       " << format_double(*r.exact) << '\n';
  if (r.abs_error) out << "abs_error   " << format_double(*r.abs_error) << '\n';
  out << "wall_time   " << format_double(r.wall_time_ms) << " ms\n";
  if (!r.error.empty()) out << "error       " << r.error << '\n';
  return out.str();
}

}  // namespace rstar::bench
