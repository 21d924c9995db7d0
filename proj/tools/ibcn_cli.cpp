// Command-line driver for the block cubic Newton benchmark harness:
//   ibcn run --config cfg [--workers N] [--out DIR]
//   ibcn average --glob 'out/prefix_*.csv' --out avg.csv [--fstar-summary out/summary.csv]
//   ibcn check --config cfg
// Exit codes: 0 ok, 1 config error, 2 data error, 3 solver abort.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "ibcn/experiment.hpp"

namespace fs = std::filesystem;

namespace {

bool glob_match(const std::string& pat, const std::string& name) {
  // '*' matches any (possibly empty) substring; everything else is literal
  std::size_t p = 0, s = 0, star = std::string::npos, back = 0;
  while (s < name.size()) {
    if (p < pat.size() && (pat[p] == name[s])) {
      ++p, ++s;
    } else if (p < pat.size() && pat[p] == '*') {
      star = p++;
      back = s;
    } else if (star != std::string::npos) {
      p = star + 1;
      s = ++back;
    } else {
      return false;
    }
  }
  while (p < pat.size() && pat[p] == '*') ++p;
  return p == pat.size();
}

std::vector<fs::path> expand_glob(const std::string& pattern) {
  const fs::path pat(pattern);
  const fs::path dir = pat.has_parent_path() ? pat.parent_path() : fs::path(".");
  const std::string name_pat = pat.filename().string();
  std::vector<fs::path> matches;
  if (!fs::exists(dir)) return matches;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (glob_match(name_pat, entry.path().filename().string()))
      matches.push_back(entry.path());
  }
  std::sort(matches.begin(), matches.end());
  return matches;
}

int cmd_run(const std::string& config_path, int workers, const std::string& out_override) {
  ibcn::ExperimentConfig cfg = ibcn::parse_experiment_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  const ibcn::ExperimentResult result = ibcn::run_experiment(cfg, workers);
  for (const auto& p : result.trace_paths) std::cout << p.string() << '\n';
  std::cout << result.summary_path.string() << '\n';
  std::cerr << result.runs.size() << " runs completed, config sha "
            << cfg.config_sha().substr(0, 12) << "...\n";
  return 0;
}

int cmd_check(const std::string& config_path) {
  const ibcn::ExperimentConfig cfg = ibcn::parse_experiment_config_file(config_path);
  if (cfg.kind == ibcn::ProblemKind::logreg) {
    // surface dataset problems now rather than mid-sweep
    ibcn::Dataset ds = ibcn::parse_libsvm_file(cfg.dataset_path);
    if (cfg.scale) ds = ibcn::scale_features(ds, cfg.scale_lo, cfg.scale_hi);
    const ibcn::LogRegObjective problem(ibcn::to_sparse_matrix(ds), ibcn::labels_vector(ds),
                                        cfg.lambda);
    for (ibcn::Index q : cfg.block_sizes)
      if (q > problem.dimension())
        throw ibcn::ConfigError("sweep.block_sizes: block size exceeds problem dimension");
    std::cout << "dataset: " << cfg.dataset_path << " (" << ds.num_samples() << " samples, "
              << ds.n_features << " features)\n";
  } else {
    for (ibcn::Index q : cfg.block_sizes)
      if (q > cfg.n)
        throw ibcn::ConfigError("sweep.block_sizes: block size exceeds problem dimension");
  }
  const std::size_t n_runs = cfg.solvers.size() * cfg.block_sizes.size() * cfg.seeds.size();
  std::cout << "config ok: " << n_runs << " runs (" << cfg.solvers.size() << " solvers x "
            << cfg.block_sizes.size() << " block sizes x " << cfg.seeds.size() << " seeds), "
            << cfg.max_iters << " iterations each\n"
            << "output dir: " << cfg.out_dir << '\n'
            << "config sha: " << cfg.config_sha() << '\n';
  return 0;
}

int cmd_average(const std::string& pattern, const std::string& out_path,
                const std::string& fstar_summary, bool has_fstar, double fstar) {
  const std::vector<fs::path> paths = expand_glob(pattern);
  if (paths.empty()) throw ibcn::DataError("average: no trace files match '" + pattern + "'");

  std::vector<double> fstars;
  const std::vector<double>* fstars_ptr = nullptr;
  if (!fstar_summary.empty()) {
    const auto lookup = ibcn::read_summary_fstar(fstar_summary);
    for (const auto& p : paths) {
      const ibcn::Trace t = ibcn::read_trace(p);
      const auto it = lookup.find(t.meta.problem);
      if (it == lookup.end())
        throw ibcn::DataError("average: no fstar entry for instance '" + t.meta.problem +
                              "' of " + p.string());
      fstars.push_back(it->second);
    }
    fstars_ptr = &fstars;
  } else if (has_fstar) {
    fstars.assign(paths.size(), fstar);
    fstars_ptr = &fstars;
  }

  const ibcn::Trace avg = ibcn::average_traces(paths, fstars_ptr);
  ibcn::write_trace(avg, out_path);
  std::cerr << "averaged " << paths.size() << " traces into " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block cubic Newton solvers and benchmark sweeps"};
  app.require_subcommand(1);

  std::string config_path, out_dir, pattern, out_path, fstar_summary;
  int workers = 1;
  double fstar = 0.0;

  auto* run = app.add_subcommand("run", "run a full experiment sweep");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--workers", workers, "number of concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "override the output directory");

  auto* average = app.add_subcommand("average", "average trace files row-wise");
  average->add_option("--glob", pattern, "trace file pattern, '*' wildcards")->required();
  average->add_option("--out", out_path, "output trace file")->required();
  average->add_option("--fstar-summary", fstar_summary,
                      "summary.csv used to subtract each instance's best objective value");
  auto* fstar_opt = average->add_option("--fstar", fstar, "constant subtracted from the f column");

  auto* check = app.add_subcommand("check", "validate a config without running it");
  check->add_option("--config", config_path, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path, workers, out_dir);
    if (app.got_subcommand(check)) return cmd_check(config_path);
    if (app.got_subcommand(average))
      return cmd_average(pattern, out_path, fstar_summary, !fstar_opt->empty(), fstar);
  } catch (const ibcn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ibcn::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ibcn::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const ibcn::IoError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "solver abort: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
