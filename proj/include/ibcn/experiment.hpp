#pragma once

#include <openssl/evp.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ibcn/baselines.hpp"
#include "ibcn/libsvm.hpp"
#include "ibcn/problems/logreg.hpp"
#include "ibcn/problems/sparse_ls.hpp"
#include "ibcn/solver.hpp"
#include "ibcn/trace.hpp"

namespace ibcn {

inline constexpr int kConfigSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Plain-text config: "key = value" lines grouped under [section] headers,
// '#' comments, a top-level "schema = 1" line. See README for the schema.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KvConfig {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    return s != sections.end() && s->second.count(key) > 0;
  }

  std::string get(const std::string& sec, const std::string& key) const {
    const auto s = sections.find(sec);
    if (s == sections.end() || !s->second.count(key))
      throw ConfigError(sec + "." + key + ": missing required field");
    return s->second.at(key);
  }

  std::string get_or(const std::string& sec, const std::string& key,
                     const std::string& dflt) const {
    return has(sec, key) ? sections.at(sec).at(key) : dflt;
  }
};

inline KvConfig parse_kv_config(std::istream& in) {
  KvConfig cfg;
  std::string line, section;
  long long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) +
                                                ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.sections[section][key] = val;
  }
  return cfg;
}

inline double to_double(const std::string& sec, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(sec + "." + key + ": expected a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& sec, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(sec + "." + key + ": expected an integer, got '" + v + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : v) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::exchange(cur, ""));
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

}  // namespace detail

enum class ProblemKind { sparse_ls, logreg };

struct ExperimentConfig {
  ProblemKind kind = ProblemKind::sparse_ls;
  std::string problem_name;  // token used in file names and instance ids

  // synthetic sparse least squares
  Index m = 500;
  Index n = 10000;
  double density = 0.05;
  double noise_sd = 1e-3;
  double lambda = 1e-3;
  double omega = 1e-2;
  double p = 0.5;

  // logistic regression on a dataset
  std::string dataset_path;
  bool scale = false;
  double scale_lo = -1.0;
  double scale_hi = 1.0;

  std::vector<std::string> solvers;
  std::vector<Index> block_sizes;
  std::vector<std::uint64_t> seeds;
  long long max_iters = 10000;

  SolverConfig base;  // sigma/eta/gamma/tau/beta/grad_tol and subsolver tuning
  ArmijoOptions armijo;

  std::string out_dir = "out";

  void validate() const {
    if (problem_name.empty()) throw ConfigError("problem.name: must not be empty");
    if (solvers.empty()) throw ConfigError("sweep.solvers: must not be empty");
    for (const auto& s : solvers)
      if (s != "ibcn" && s != "bcd1" && s != "bcd2")
        throw ConfigError("sweep.solvers: unknown solver '" + s + "'");
    if (block_sizes.empty()) throw ConfigError("sweep.block_sizes: must not be empty");
    for (Index q : block_sizes)
      if (q < 1) throw ConfigError("sweep.block_sizes: block sizes must be >= 1");
    if (seeds.empty()) throw ConfigError("sweep.seeds: must not be empty");
    if (max_iters < 1) throw ConfigError("sweep.max_iters: must be >= 1");
    if (kind == ProblemKind::sparse_ls) {
      if (m < 1 || n < 1) throw ConfigError("problem.m/problem.n: must be >= 1");
      if (!(density > 0 && density <= 1)) throw ConfigError("problem.density: must be in (0,1]");
      if (!(noise_sd >= 0)) throw ConfigError("problem.noise_sd: must be >= 0");
      if (!(omega > 0)) throw ConfigError("problem.omega: must be positive");
      if (!(p > 0 && p < 1)) throw ConfigError("problem.p: must be in (0,1)");
    } else {
      if (dataset_path.empty()) throw ConfigError("problem.dataset: missing required field");
      if (scale && !(scale_lo < scale_hi))
        throw ConfigError("problem.scale_lo/scale_hi: need lo < hi");
    }
    if (!(lambda >= 0)) throw ConfigError("problem.lambda: must be >= 0");
    base.validate();
    armijo.validate();
  }

  /// Canonical serialization of every semantically relevant field; the
  /// output directory is deliberately excluded.
  std::string canonical_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "schema=" << kConfigSchemaVersion << ";kind="
       << (kind == ProblemKind::sparse_ls ? "sparse_ls" : "logreg") << ";name=" << problem_name
       << ";lambda=" << lambda;
    if (kind == ProblemKind::sparse_ls) {
      os << ";m=" << m << ";n=" << n << ";density=" << density << ";noise_sd=" << noise_sd
         << ";omega=" << omega << ";p=" << p;
    } else {
      os << ";dataset=" << dataset_path << ";scale=" << scale;
      if (scale) os << ";lo=" << scale_lo << ";hi=" << scale_hi;
    }
    os << ";solvers=";
    for (const auto& s : solvers) os << s << ",";
    os << ";q=";
    for (Index q : block_sizes) os << q << ",";
    os << ";seeds=";
    for (auto s : seeds) os << s << ",";
    os << ";max_iters=" << max_iters << ";sigma0=" << base.sigma0
       << ";sigma_min=" << base.sigma_min << ";eta1=" << base.eta1 << ";eta2=" << base.eta2
       << ";gamma1=" << base.gamma1 << ";gamma2=" << base.gamma2 << ";gamma3=" << base.gamma3
       << ";tau=" << base.tau << ";beta=" << base.beta << ";grad_tol=" << base.grad_tol
       << ";sub_max=" << base.subsolver_max_iters << ";sub_bb=" << base.subsolver_bb_min << ","
       << base.subsolver_bb_max << ";sub_win=" << base.subsolver_window
       << ";sub_1d=" << base.subsolver_exact_1d << ";armijo=" << armijo.initial_step << ","
       << armijo.backtrack << "," << armijo.c << "," << armijo.max_backtracks;
    return os.str();
  }

  std::string config_sha() const { return detail::sha256_hex(canonical_string()); }
};

inline ExperimentConfig parse_experiment_config(std::istream& in) {
  const detail::KvConfig kv = detail::parse_kv_config(in);
  if (!kv.has("", "schema")) throw ConfigError("schema: missing required top-level field");
  if (detail::to_int("", "schema", kv.get("", "schema")) != kConfigSchemaVersion)
    throw ConfigError("schema: unsupported version (this build reads schema 1)");

  ExperimentConfig cfg;
  const std::string type = kv.get("problem", "type");
  if (type == "sparse_ls") {
    cfg.kind = ProblemKind::sparse_ls;
    cfg.m = detail::to_int("problem", "m", kv.get_or("problem", "m", "500"));
    cfg.n = detail::to_int("problem", "n", kv.get_or("problem", "n", "10000"));
    cfg.density = detail::to_double("problem", "density", kv.get_or("problem", "density", "0.05"));
    cfg.noise_sd =
        detail::to_double("problem", "noise_sd", kv.get_or("problem", "noise_sd", "1e-3"));
    cfg.lambda = detail::to_double("problem", "lambda", kv.get_or("problem", "lambda", "1e-3"));
    cfg.omega = detail::to_double("problem", "omega", kv.get_or("problem", "omega", "1e-2"));
    cfg.p = detail::to_double("problem", "p", kv.get_or("problem", "p", "0.5"));
    cfg.problem_name = kv.get_or("problem", "name", "sparsels");
  } else if (type == "logreg") {
    cfg.kind = ProblemKind::logreg;
    cfg.dataset_path = kv.get("problem", "dataset");
    cfg.lambda = detail::to_double("problem", "lambda", kv.get_or("problem", "lambda", "1e-3"));
    cfg.scale = kv.has("problem", "scale_lo") || kv.has("problem", "scale_hi");
    if (cfg.scale) {
      cfg.scale_lo = detail::to_double("problem", "scale_lo", kv.get("problem", "scale_lo"));
      cfg.scale_hi = detail::to_double("problem", "scale_hi", kv.get("problem", "scale_hi"));
    }
    std::string stem = std::filesystem::path(cfg.dataset_path).stem().string();
    for (char& ch : stem)
      if (ch == '_') ch = '-';
    cfg.problem_name = kv.get_or("problem", "name", stem.empty() ? "dataset" : stem);
  } else {
    throw ConfigError("problem.type: expected 'sparse_ls' or 'logreg', got '" + type + "'");
  }

  for (const auto& s : detail::split_list(kv.get("sweep", "solvers"))) cfg.solvers.push_back(s);
  for (const auto& s : detail::split_list(kv.get("sweep", "block_sizes")))
    cfg.block_sizes.push_back(detail::to_int("sweep", "block_sizes", s));
  for (const auto& s : detail::split_list(kv.get("sweep", "seeds")))
    cfg.seeds.push_back(static_cast<std::uint64_t>(detail::to_int("sweep", "seeds", s)));
  cfg.max_iters = detail::to_int("sweep", "max_iters", kv.get_or("sweep", "max_iters", "10000"));

  SolverConfig& b = cfg.base;
  if (kv.has("ibcn", "sigma0")) b.sigma0 = detail::to_double("ibcn", "sigma0", kv.get("ibcn", "sigma0"));
  if (kv.has("ibcn", "sigma_min"))
    b.sigma_min = detail::to_double("ibcn", "sigma_min", kv.get("ibcn", "sigma_min"));
  if (kv.has("ibcn", "eta1")) b.eta1 = detail::to_double("ibcn", "eta1", kv.get("ibcn", "eta1"));
  if (kv.has("ibcn", "eta2")) b.eta2 = detail::to_double("ibcn", "eta2", kv.get("ibcn", "eta2"));
  if (kv.has("ibcn", "gamma1")) b.gamma1 = detail::to_double("ibcn", "gamma1", kv.get("ibcn", "gamma1"));
  if (kv.has("ibcn", "gamma2")) b.gamma2 = detail::to_double("ibcn", "gamma2", kv.get("ibcn", "gamma2"));
  if (kv.has("ibcn", "gamma3")) b.gamma3 = detail::to_double("ibcn", "gamma3", kv.get("ibcn", "gamma3"));
  if (kv.has("ibcn", "tau")) b.tau = detail::to_double("ibcn", "tau", kv.get("ibcn", "tau"));
  if (kv.has("ibcn", "beta")) b.beta = detail::to_double("ibcn", "beta", kv.get("ibcn", "beta"));
  if (kv.has("ibcn", "grad_tol"))
    b.grad_tol = detail::to_double("ibcn", "grad_tol", kv.get("ibcn", "grad_tol"));
  if (kv.has("ibcn", "subsolver_max_iters"))
    b.subsolver_max_iters =
        static_cast<int>(detail::to_int("ibcn", "subsolver_max_iters", kv.get("ibcn", "subsolver_max_iters")));

  if (kv.has("armijo", "backtrack"))
    cfg.armijo.backtrack = detail::to_double("armijo", "backtrack", kv.get("armijo", "backtrack"));
  if (kv.has("armijo", "c")) cfg.armijo.c = detail::to_double("armijo", "c", kv.get("armijo", "c"));
  if (kv.has("armijo", "max_backtracks"))
    cfg.armijo.max_backtracks =
        static_cast<int>(detail::to_int("armijo", "max_backtracks", kv.get("armijo", "max_backtracks")));

  cfg.out_dir = kv.get_or("output", "dir", "out");
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_experiment_config(in);
}

// ---------------------------------------------------------------------------
// Sweep execution
// ---------------------------------------------------------------------------

struct RunOutcome {
  std::filesystem::path trace_path;
  std::string instance_id;  // shared by runs minimizing the same objective
  std::string solver;
  Index q = 0;
  std::uint64_t seed = 0;
  double final_f = 0.0;
  double final_gnorm = 0.0;
};

struct ExperimentResult {
  std::vector<std::filesystem::path> trace_paths;
  std::filesystem::path summary_path;
  std::vector<RunOutcome> runs;
};

namespace detail {

struct PlannedRun {
  std::string solver;
  Index q = 0;
  std::uint64_t seed = 0;
};

inline std::vector<PlannedRun> plan_runs(const ExperimentConfig& cfg) {
  std::vector<PlannedRun> runs;
  for (const auto& solver : cfg.solvers)
    for (Index q : cfg.block_sizes)
      for (std::uint64_t seed : cfg.seeds) runs.push_back(PlannedRun{solver, q, seed});
  return runs;
}

template <BlockObjective P>
RunOutcome execute_run(const P& problem, const ExperimentConfig& cfg, const PlannedRun& run,
                       const std::string& instance_id, const std::string& sha) {
  SolverConfig sc = cfg.base;
  sc.selection = SelectionRule::max_abs_fill(run.q);
  sc.seed = run.seed;
  sc.max_iters = cfg.max_iters;

  const Vector x0 = Vector::Zero(problem.dimension());
  Trace trace;
  RunOutcome out;
  if (run.solver == "ibcn") {
    BlockCubicNewton<P> solver(problem, x0, sc);
    trace = solver.run();
    out.final_f = solver.f();
    out.final_gnorm = solver.grad_norm();
  } else {
    const BcdVariant variant =
        run.solver == "bcd1" ? BcdVariant::first_order : BcdVariant::diag_second_order;
    GreedyBcd<P> solver(problem, x0, sc, variant, cfg.armijo);
    trace = solver.run();
    out.final_f = solver.f();
    out.final_gnorm = solver.grad_norm();
  }
  trace.meta.problem = instance_id;
  trace.meta.config_sha = sha;

  char fname[256];
  std::snprintf(fname, sizeof fname, "%s_%s_q%lld_s%llu.csv", cfg.problem_name.c_str(),
                run.solver.c_str(), static_cast<long long>(run.q),
                static_cast<unsigned long long>(run.seed));
  out.trace_path = std::filesystem::path(cfg.out_dir) / fname;
  write_trace(trace, out.trace_path);
  out.instance_id = instance_id;
  out.solver = run.solver;
  out.q = run.q;
  out.seed = run.seed;
  return out;
}

inline void write_summary(const std::filesystem::path& path, std::vector<RunOutcome>& runs) {
  std::map<std::string, double> fstar;
  for (const RunOutcome& r : runs) {
    auto [it, fresh] = fstar.try_emplace(r.instance_id, r.final_f);
    if (!fresh) it->second = std::min(it->second, r.final_f);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open summary file for writing: " + path.string());
  out << "problem,solver,q,seed,final_f,fstar,final_err,final_gnorm\n";
  for (const RunOutcome& r : runs) {
    const double fs = fstar.at(r.instance_id);
    out << r.instance_id << ',' << r.solver << ',' << r.q << ',' << r.seed << ','
        << fmt17(r.final_f) << ',' << fmt17(fs) << ',' << fmt17(r.final_f - fs) << ','
        << fmt17(r.final_gnorm) << '\n';
  }
  if (!out) throw IoError("failed writing summary file: " + path.string());
}

}  // namespace detail

/// Runs the whole (solver x block size x seed) sweep from x0 = 0, writing
/// one trace file per run plus a summary.csv whose fstar column is the best
/// objective value found on each problem instance.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const std::string sha = cfg.config_sha();
  const auto runs = detail::plan_runs(cfg);

  std::vector<RunOutcome> outcomes(runs.size());
  auto run_all = [&](auto&& problem_for_seed, auto&& instance_id_for_seed) {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(runs.size());
    auto worker = [&]() {
      for (std::size_t i = next.fetch_add(1); i < runs.size(); i = next.fetch_add(1)) {
        try {
          outcomes[i] = detail::execute_run(problem_for_seed(runs[i].seed), cfg, runs[i],
                                            instance_id_for_seed(runs[i].seed), sha);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int nthreads = std::max(1, workers);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads - 1));
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  };

  if (cfg.kind == ProblemKind::sparse_ls) {
    std::map<std::uint64_t, SparseLsGenerated> instances;
    for (std::uint64_t seed : cfg.seeds)
      if (!instances.count(seed))
        instances.emplace(seed, generate_sparse_ls(cfg.m, cfg.n, cfg.density, cfg.noise_sd, seed,
                                                   cfg.lambda, cfg.omega, cfg.p));
    for (Index q : cfg.block_sizes)
      if (q > cfg.n) throw ConfigError("sweep.block_sizes: block size exceeds problem dimension");
    run_all([&](std::uint64_t seed) -> const SparseLsObjective& {
      return instances.at(seed).objective;
    },
            [&](std::uint64_t seed) { return cfg.problem_name + "-seed" + std::to_string(seed); });
  } else {
    Dataset ds = parse_libsvm_file(cfg.dataset_path);
    if (cfg.scale) ds = scale_features(ds, cfg.scale_lo, cfg.scale_hi);
    const LogRegObjective problem(to_sparse_matrix(ds), labels_vector(ds), cfg.lambda);
    for (Index q : cfg.block_sizes)
      if (q > problem.dimension())
        throw ConfigError("sweep.block_sizes: block size exceeds problem dimension");
    run_all([&](std::uint64_t) -> const LogRegObjective& { return problem; },
            [&](std::uint64_t) { return cfg.problem_name; });
  }

  ExperimentResult result;
  result.runs = std::move(outcomes);
  for (const RunOutcome& r : result.runs) result.trace_paths.push_back(r.trace_path);
  result.summary_path = std::filesystem::path(cfg.out_dir) / "summary.csv";
  detail::write_summary(result.summary_path, result.runs);
  return result;
}

// ---------------------------------------------------------------------------
// Trace averaging
// ---------------------------------------------------------------------------

/// Row-wise arithmetic mean of several traces of identical length. When an
/// fstar value is supplied per input trace it is subtracted from that
/// trace's f column first, so the result carries mean objective error.
inline Trace average_traces(const std::vector<std::filesystem::path>& paths,
                            const std::vector<double>* fstar_per_trace = nullptr) {
  if (paths.empty()) throw Error("average_traces: no input traces");
  if (fstar_per_trace && fstar_per_trace->size() != paths.size())
    throw Error("average_traces: fstar list length does not match trace list");

  std::vector<Trace> traces;
  traces.reserve(paths.size());
  for (const auto& p : paths) traces.push_back(read_trace(p));

  const std::size_t len = traces.front().rows.size();
  std::string offenders;
  for (std::size_t t = 0; t < traces.size(); ++t)
    if (traces[t].rows.size() != len) offenders += " " + paths[t].string();
  if (!offenders.empty())
    throw Error("average_traces: trace lengths differ; offending files:" + offenders);

  Trace avg;
  avg.rows.resize(len);
  const double inv = 1.0 / static_cast<double>(traces.size());
  for (std::size_t r = 0; r < len; ++r) {
    TraceRow& row = avg.rows[r];
    row.iter = traces.front().rows[r].iter;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      const TraceRow& in = traces[t].rows[r];
      if (in.iter != row.iter)
        throw Error("average_traces: iteration indices differ at row " + std::to_string(r) +
                    " in " + paths[t].string());
      const double fs = fstar_per_trace ? (*fstar_per_trace)[t] : 0.0;
      row.f += (in.f - fs) * inv;
      row.gnorm += in.gnorm * inv;
      row.block_gnorm += in.block_gnorm * inv;
      row.sigma += in.sigma * inv;
      row.success += in.success * inv;
      row.time_s += in.time_s * inv;
    }
  }

  auto common = [&](auto&& proj, auto dflt) {
    auto v = proj(traces.front().meta);
    for (const Trace& t : traces)
      if (proj(t.meta) != v) return decltype(v)(dflt);
    return v;
  };
  avg.meta.solver = common([](const RunMeta& m) { return m.solver; }, std::string("mixed"));
  avg.meta.q = common([](const RunMeta& m) { return m.q; }, Index{0});
  avg.meta.seed = 0;
  avg.meta.problem = common([](const RunMeta& m) { return m.problem; }, std::string("mixed"));
  avg.meta.config_sha = common([](const RunMeta& m) { return m.config_sha; }, std::string());
  return avg;
}

/// fstar lookup by instance id from a summary.csv produced by run_experiment.
inline std::map<std::string, double> read_summary_fstar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open summary file: " + path.string());
  std::map<std::string, double> out;
  std::string line;
  std::getline(in, line);  // header
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
      if (ch == ',') cells.push_back(std::exchange(cur, ""));
      else cur.push_back(ch);
    }
    cells.push_back(cur);
    if (cells.size() != 8) throw ParseError("malformed summary row in " + path.string(), lineno);
    out[cells[0]] = detail::to_double("summary", "fstar", cells[5]);
  }
  return out;
}

}  // namespace ibcn
