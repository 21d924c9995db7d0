#pragma once

#include <Eigen/SparseCore>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ibcn/block.hpp"
#include "ibcn/errors.hpp"

namespace ibcn {

struct Feature {
  Index index = 0;  // 0-based; LIBSVM files are 1-based
  double value = 0.0;
  bool operator==(const Feature&) const = default;
};

/// Sparse sample rows with scalar labels. n_features is the largest feature
/// index seen; provenance records where the data came from and what was
/// done to it.
struct Dataset {
  std::vector<std::vector<Feature>> rows;
  std::vector<double> labels;
  Index n_features = 0;
  std::string provenance;

  Index num_samples() const { return static_cast<Index>(rows.size()); }
};

namespace detail {

inline double parse_double_token(const std::string& tok, long long line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw ParseError("malformed number '" + tok + "'", line);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("malformed number '" + tok + "'", line);
  }
}

inline long long parse_feature_index(const std::string& tok, long long line) {
  long long v = 0;
  const auto* first = tok.data();
  const auto* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw ParseError("malformed feature index '" + tok + "'", line);
  return v;
}

// Maps {0,1} and {1,2} label sets onto {-1,+1}, smaller label to -1.
inline void normalize_binary_labels(std::vector<double>& labels) {
  std::set<double> distinct(labels.begin(), labels.end());
  const bool zero_one = distinct == std::set<double>{0.0, 1.0};
  const bool one_two = distinct == std::set<double>{1.0, 2.0};
  if (!zero_one && !one_two) return;
  const double low = zero_one ? 0.0 : 1.0;
  for (double& l : labels) l = (l == low) ? -1.0 : 1.0;
}

}  // namespace detail

/// Parses LIBSVM text: one sample per line, "label idx:val idx:val ...",
/// feature indices 1-based and strictly increasing within a line, '#'
/// starting a comment. Binary {0,1} and {1,2} label sets are normalized to
/// {-1,+1}.
inline Dataset parse_libsvm(std::istream& in, std::string provenance = "<stream>") {
  Dataset ds;
  ds.provenance = std::move(provenance);
  std::string line;
  long long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    ds.labels.push_back(detail::parse_double_token(tok, lineno));
    std::vector<Feature> row;
    long long prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw ParseError("expected 'index:value', got '" + tok + "'", lineno);
      const long long idx = detail::parse_feature_index(tok.substr(0, colon), lineno);
      if (idx < 1) throw ParseError("feature index must be >= 1", lineno);
      if (idx <= prev_index)
        throw ParseError("feature indices must be strictly increasing", lineno);
      prev_index = idx;
      const double val = detail::parse_double_token(tok.substr(colon + 1), lineno);
      row.push_back(Feature{static_cast<Index>(idx - 1), val});
      ds.n_features = std::max(ds.n_features, static_cast<Index>(idx));
    }
    ds.rows.push_back(std::move(row));
  }
  if (ds.rows.empty()) throw DataError("empty dataset: " + ds.provenance);
  detail::normalize_binary_labels(ds.labels);
  return ds;
}

inline Dataset parse_libsvm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  return parse_libsvm(in, path);
}

inline void write_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", ds.labels[i]);
    out << buf;
    for (const Feature& f : ds.rows[i]) {
      std::snprintf(buf, sizeof buf, "%.17g", f.value);
      out << ' ' << (f.index + 1) << ':' << buf;
    }
    out << '\n';
  }
}

/// Affinely maps every feature column so its observed minimum and maximum
/// (implicit zeros included) land on [lo, hi]; constant columns map to lo.
/// Columns whose map moves the implicit zeros become dense in the result.
inline Dataset scale_features(const Dataset& ds, double lo, double hi) {
  if (!(lo < hi)) throw Error("scale_features: need lo < hi");
  if (ds.rows.empty()) throw DataError("scale_features: empty dataset");
  const Index n = ds.n_features;
  const Index m = ds.num_samples();

  std::vector<double> cmin(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<double> cmax(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  std::vector<Index> count(static_cast<std::size_t>(n), 0);
  for (const auto& row : ds.rows) {
    for (const Feature& f : row) {
      auto j = static_cast<std::size_t>(f.index);
      cmin[j] = std::min(cmin[j], f.value);
      cmax[j] = std::max(cmax[j], f.value);
      ++count[j];
    }
  }
  std::vector<double> scale(static_cast<std::size_t>(n)), shift(static_cast<std::size_t>(n));
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
    if (count[j] < m) {  // implicit zeros participate in the column range
      cmin[j] = std::min(cmin[j], 0.0);
      cmax[j] = std::max(cmax[j], 0.0);
    }
    if (count[j] == 0 || cmin[j] == cmax[j]) {
      scale[j] = 0.0;
      shift[j] = lo;
    } else {
      scale[j] = (hi - lo) / (cmax[j] - cmin[j]);
      shift[j] = lo - scale[j] * cmin[j];
    }
  }

  Dataset out;
  out.labels = ds.labels;
  out.n_features = n;
  char range[96];
  std::snprintf(range, sizeof range, " [scaled to %.17g..%.17g]", lo, hi);
  out.provenance = ds.provenance + range;
  out.rows.resize(ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    std::vector<double> dense(static_cast<std::size_t>(n), 0.0);
    for (const Feature& f : ds.rows[i]) dense[static_cast<std::size_t>(f.index)] = f.value;
    auto& row = out.rows[i];
    row.reserve(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) {
      const auto ji = static_cast<std::size_t>(j);
      const double v = scale[ji] * dense[ji] + shift[ji];
      if (v != 0.0) row.push_back(Feature{j, v});
    }
  }
  return out;
}

/// Column-major sparse matrix view of the dataset rows.
inline Eigen::SparseMatrix<double> to_sparse_matrix(const Dataset& ds) {
  std::vector<Eigen::Triplet<double>> trips;
  std::size_t nnz = 0;
  for (const auto& row : ds.rows) nnz += row.size();
  trips.reserve(nnz);
  for (Index i = 0; i < ds.num_samples(); ++i)
    for (const Feature& f : ds.rows[static_cast<std::size_t>(i)])
      trips.emplace_back(static_cast<int>(i), static_cast<int>(f.index), f.value);
  Eigen::SparseMatrix<double> A(static_cast<int>(ds.num_samples()),
                                static_cast<int>(ds.n_features));
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

inline Vector labels_vector(const Dataset& ds) {
  Vector b(ds.num_samples());
  for (Index i = 0; i < ds.num_samples(); ++i) b[i] = ds.labels[static_cast<std::size_t>(i)];
  return b;
}

}  // namespace ibcn
