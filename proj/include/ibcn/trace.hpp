#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ibcn/block.hpp"
#include "ibcn/errors.hpp"

namespace ibcn {

/// One measurement per solver iteration; f, gradient norms and sigma refer
/// to the state at the start of the iteration, success to its outcome.
/// success is stored as a double so averaged traces can hold fractions.
struct TraceRow {
  long long iter = 0;
  double f = 0.0;
  double gnorm = 0.0;
  double block_gnorm = 0.0;
  double sigma = 0.0;
  double success = 0.0;
  double time_s = 0.0;
};

struct RunMeta {
  std::string solver;
  Index q = 0;
  std::uint64_t seed = 0;
  std::string problem;
  std::string config_sha;
};

struct Trace {
  std::vector<TraceRow> rows;
  RunMeta meta;

  // Iteration indices must be strictly increasing and f non-increasing; a
  // violating trace means a solver bug and is refused at write time.
  void validate() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].iter <= rows[i - 1].iter)
        throw Error("trace: iteration indices not strictly increasing at row " +
                    std::to_string(i));
      if (rows[i].f > rows[i - 1].f)
        throw Error("trace: objective increased at iteration " +
                    std::to_string(rows[i].iter));
    }
  }
};

inline constexpr const char* kTraceHeader = "iter,f,gnorm,block_gnorm,sigma,success,time_s";

namespace detail {
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_trace(const Trace& trace, const std::filesystem::path& path) {
  trace.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open trace file for writing: " + path.string());
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.iter << ',' << detail::fmt17(r.f) << ',' << detail::fmt17(r.gnorm) << ','
        << detail::fmt17(r.block_gnorm) << ',' << detail::fmt17(r.sigma) << ','
        << detail::fmt17(r.success) << ',' << detail::fmt17(r.time_s) << '\n';
  }
  if (!out) throw IoError("failed writing trace file: " + path.string());

  const std::filesystem::path meta_path = path.string() + ".meta";
  std::ofstream meta(meta_path);
  if (!meta) throw IoError("cannot open metadata file for writing: " + meta_path.string());
  meta << "solver=" << trace.meta.solver << '\n'
       << "q=" << trace.meta.q << '\n'
       << "seed=" << trace.meta.seed << '\n'
       << "problem=" << trace.meta.problem << '\n'
       << "config_sha=" << trace.meta.config_sha << '\n';
  if (!meta) throw IoError("failed writing metadata file: " + meta_path.string());
}

inline Trace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file: " + path.string());
  Trace trace;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file " + path.string(), 0);
  if (line != kTraceHeader)
    throw ParseError("unexpected trace header in " + path.string(), 1);
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    TraceRow r;
    char c = 0;
    if (!(ls >> r.iter >> c && c == ',' && ls >> r.f >> c && c == ',' && ls >> r.gnorm >> c &&
          c == ',' && ls >> r.block_gnorm >> c && c == ',' && ls >> r.sigma >> c && c == ',' &&
          ls >> r.success >> c && c == ',' && ls >> r.time_s))
      throw ParseError("malformed trace row in " + path.string(), lineno);
    trace.rows.push_back(r);
  }

  const std::filesystem::path meta_path = path.string() + ".meta";
  if (std::ifstream meta(meta_path); meta) {
    while (std::getline(meta, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      if (key == "solver") trace.meta.solver = val;
      else if (key == "q") trace.meta.q = std::stoll(val);
      else if (key == "seed") trace.meta.seed = std::stoull(val);
      else if (key == "problem") trace.meta.problem = val;
      else if (key == "config_sha") trace.meta.config_sha = val;
    }
  }
  return trace;
}

}  // namespace ibcn
