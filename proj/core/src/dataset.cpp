#include "dab/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dab/errors.hpp"
#include "dab/numfmt.hpp"
#include "dab/rng.hpp"

namespace dab {

namespace {

void shuffle_rows(Dataset& ds, Rng& rng) {
  const std::size_t n = ds.n();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(ds.x[i], ds.x[j]);
    if (ds.has_target) std::swap(ds.y[i], ds.y[j]);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

Dataset cubic_train(Rng& rng, std::size_t n_train) {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.target_name = "y";
  ds.has_target = true;
  for (std::size_t i = 0; i < n_train; ++i) {
    const double x = rng.uniform(-4.0, 4.0);
    ds.x.push_back({x});
    ds.y.push_back(x * x * x + rng.normal(0.0, 3.0));
  }
  return ds;
}

Dataset grid_test(double lo, double hi, std::size_t points) {
  Dataset ds;
  ds.feature_names = {"x"};
  ds.target_name = "y";
  ds.has_target = true;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(points - 1);
    ds.x.push_back({x});
    ds.y.push_back(x * x * x);  // clean curve, no observation noise
  }
  return ds;
}

}  // namespace

DatasetPair gen_cubic(std::uint64_t seed, std::size_t n_train) {
  if (n_train < 2) throw Error("gen_cubic: need at least 2 training points");
  Rng rng(seed);
  DatasetPair pair;
  pair.train = cubic_train(rng, n_train);
  shuffle_rows(pair.train, rng);
  pair.test = grid_test(-5.0, 5.0, 201);
  return pair;
}

DatasetPair gen_two_clusters(std::uint64_t seed, std::size_t n_per_cluster) {
  if (n_per_cluster < 1) throw Error("gen_two_clusters: empty clusters");
  Rng rng(seed);
  Dataset train;
  train.feature_names = {"x"};
  train.target_name = "y";
  train.has_target = true;
  for (std::size_t i = 0; i < 2 * n_per_cluster; ++i) {
    const double x = i < n_per_cluster ? rng.uniform(-5.0, -2.0) : rng.uniform(2.0, 5.0);
    train.x.push_back({x});
    train.y.push_back(x * x * x + rng.normal(0.0, 3.0));
  }
  shuffle_rows(train, rng);
  DatasetPair pair;
  pair.train = std::move(train);
  pair.test = grid_test(-6.0, 6.0, 241);
  return pair;
}

BlobsResult gen_blobs(std::uint64_t seed, const BlobSpec& spec) {
  if (spec.centers.size() < 2) throw Error("gen_blobs: need at least 2 centers");
  const std::size_t d = spec.centers[0].size();
  if (d == 0) throw Error("gen_blobs: zero-dimensional centers");
  for (const auto& c : spec.centers) {
    if (c.size() != d) throw ShapeError("gen_blobs: centers disagree on dimension");
  }
  if (spec.ood_center.size() != d) {
    throw ShapeError("gen_blobs: OOD center dimension " +
                     std::to_string(spec.ood_center.size()) + " vs " + std::to_string(d));
  }
  if (!(spec.stddev > 0.0)) throw Error("gen_blobs: stddev must be positive");
  if (spec.n_per_center_train == 0) throw Error("gen_blobs: empty training blobs");

  Rng rng(seed);
  auto feature_names = [&]() {
    std::vector<std::string> names;
    for (std::size_t t = 0; t < d; ++t) names.push_back("x" + std::to_string(t));
    return names;
  };
  auto draw = [&](const std::vector<double>& center) {
    std::vector<double> p(d);
    for (std::size_t t = 0; t < d; ++t) p[t] = center[t] + spec.stddev * rng.normal();
    return p;
  };

  BlobsResult res;
  res.train.feature_names = feature_names();
  res.train.target_name = "label";
  res.train.has_target = true;
  for (std::size_t c = 0; c < spec.centers.size(); ++c) {
    for (std::size_t i = 0; i < spec.n_per_center_train; ++i) {
      res.train.x.push_back(draw(spec.centers[c]));
      res.train.y.push_back(static_cast<double>(c));
    }
  }
  shuffle_rows(res.train, rng);

  res.test.feature_names = feature_names();
  res.test.target_name = "label";
  res.test.has_target = true;
  for (std::size_t c = 0; c < spec.centers.size(); ++c) {
    for (std::size_t i = 0; i < spec.n_per_center_test; ++i) {
      res.test.x.push_back(draw(spec.centers[c]));
      res.test.y.push_back(static_cast<double>(c));
    }
  }
  shuffle_rows(res.test, rng);

  res.ood.feature_names = feature_names();
  res.ood.has_target = false;
  for (std::size_t i = 0; i < spec.ood_n; ++i) {
    res.ood.x.push_back(draw(spec.ood_center));
  }
  return res;
}

Dataset load_csv(const std::string& path, const std::string& target_column,
                 bool normalize) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty CSV file '" + path + "'");

  const auto header = split_csv_line(line);
  std::size_t target_idx = header.size();
  if (!target_column.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == target_column) {
        target_idx = i;
        break;
      }
    }
    if (target_idx == header.size()) {
      throw IoError("'" + path + "': no column named '" + target_column + "'");
    }
  }

  Dataset ds;
  ds.has_target = !target_column.empty();
  ds.target_name = target_column;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i != target_idx) ds.feature_names.push_back(header[i]);
  }
  if (ds.feature_names.empty()) {
    throw IoError("'" + path + "': no feature columns besides the target");
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) + ": " +
                    std::to_string(cells.size()) + " cells, header has " +
                    std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(ds.feature_names.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      const auto* first = cells[i].data();
      const auto* last = first + cells[i].size();
      auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
        throw IoError("'" + path + "' line " + std::to_string(line_no) + ": bad number '" +
                      cells[i] + "' in column '" + header[i] + "'");
      }
      if (i == target_idx) {
        ds.y.push_back(v);
      } else {
        row.push_back(v);
      }
    }
    ds.x.push_back(std::move(row));
  }
  if (ds.x.empty()) throw IoError("'" + path + "': no data rows");

  if (normalize) {
    const std::size_t d = ds.dim(), n = ds.n();
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (const auto& row : ds.x) {
      for (std::size_t t = 0; t < d; ++t) mean[t] += row[t];
    }
    for (std::size_t t = 0; t < d; ++t) mean[t] /= static_cast<double>(n);
    for (const auto& row : ds.x) {
      for (std::size_t t = 0; t < d; ++t) {
        const double dv = row[t] - mean[t];
        sd[t] += dv * dv;
      }
    }
    for (std::size_t t = 0; t < d; ++t) {
      sd[t] = std::sqrt(sd[t] / static_cast<double>(n));
      if (sd[t] < 1e-12) sd[t] = 1e-12;  // constant columns map to 0
    }
    normalize_with(ds, mean, sd);
  }
  return ds;
}

void normalize_with(Dataset& ds, const std::vector<double>& mean,
                    const std::vector<double>& stddev) {
  if (mean.size() != ds.dim() || stddev.size() != ds.dim()) {
    throw ShapeError("normalize_with: stats width " + std::to_string(mean.size()) +
                     " vs data width " + std::to_string(ds.dim()));
  }
  for (double s : stddev) {
    if (!(s > 0.0)) throw NumericError("normalize_with: nonpositive stddev");
  }
  for (auto& row : ds.x) {
    for (std::size_t t = 0; t < row.size(); ++t) {
      row[t] = (row[t] - mean[t]) / stddev[t];
    }
  }
  ds.normalized = true;
  ds.norm_mean = mean;
  ds.norm_std = stddev;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);  // binary: no CRLF translation
  if (!out) throw IoError("cannot write '" + path + "'");
  for (std::size_t i = 0; i < ds.feature_names.size(); ++i) {
    if (i) out << ",";
    out << ds.feature_names[i];
  }
  if (ds.has_target) out << "," << ds.target_name;
  out << "\n";
  for (std::size_t r = 0; r < ds.n(); ++r) {
    for (std::size_t t = 0; t < ds.x[r].size(); ++t) {
      if (t) out << ",";
      out << format_double(ds.x[r][t]);
    }
    if (ds.has_target) out << "," << format_double(ds.y[r]);
    out << "\n";
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace dab
