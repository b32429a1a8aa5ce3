// Command-line surface: data generation, training, evaluation, scoring,
// codebook inspection and discrete rate-distortion solving.
//
// Exit codes: 0 success, 1 runtime error, 2 usage or config error.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dab/codebook.hpp"
#include "dab/config.hpp"
#include "dab/dataset.hpp"
#include "dab/errors.hpp"
#include "dab/metrics.hpp"
#include "dab/model.hpp"
#include "dab/model_io.hpp"
#include "dab/numfmt.hpp"
#include "dab/rate_distortion.hpp"

using nlohmann::json;

namespace {

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dab::IoError("cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw dab::IoError("write to '" + path + "' failed");
}

std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty() || dir == ".") return name;
  return dir.back() == '/' ? dir + name : dir + "/" + name;
}

// Applies the model's stored z-score map to a freshly loaded table.
void apply_model_normalization(const dab::DabModel& model, dab::Dataset& ds) {
  if (model.norm_mean.empty()) return;
  dab::normalize_with(ds, model.norm_mean, model.norm_std);
}

void check_width(const dab::DabModel& model, const dab::Dataset& ds,
                 const std::string& what) {
  if (ds.dim() != model.config().input_dim) {
    throw dab::ShapeError(what + " has " + std::to_string(ds.dim()) +
                          " feature columns, model expects " +
                          std::to_string(model.config().input_dim));
  }
  if (ds.n() == 0) throw dab::IoError(what + " holds no rows");
}

std::vector<double> uncertainty_scores(dab::DabModel& model, const dab::Dataset& ds) {
  auto preds = model.predict_batch(ds.x);
  std::vector<double> out(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) out[i] = preds[i].uncertainty;
  return out;
}

// --------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string generator;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::size_t n_train = 20;
  std::size_t n_per_cluster = 10;
};

int cmd_gen_data(const GenDataArgs& a) {
  if (a.generator == "cubic") {
    auto pair = dab::gen_cubic(a.seed, a.n_train);
    dab::write_csv(join_path(a.out_dir, "train.csv"), pair.train);
    dab::write_csv(join_path(a.out_dir, "test.csv"), pair.test);
    std::cout << "wrote train.csv (" << pair.train.n() << " rows), test.csv ("
              << pair.test.n() << " rows)\n";
  } else if (a.generator == "two-clusters") {
    auto pair = dab::gen_two_clusters(a.seed, a.n_per_cluster);
    dab::write_csv(join_path(a.out_dir, "train.csv"), pair.train);
    dab::write_csv(join_path(a.out_dir, "test.csv"), pair.test);
    std::cout << "wrote train.csv (" << pair.train.n() << " rows), test.csv ("
              << pair.test.n() << " rows)\n";
  } else {
    // blobs; the spatial layout comes from the preset to keep the flag
    // surface small.
    dab::RunConfig rc = dab::preset("blob-ood");
    auto blobs = dab::gen_blobs(a.seed, rc.data.blobs);
    dab::write_csv(join_path(a.out_dir, "train.csv"), blobs.train);
    dab::write_csv(join_path(a.out_dir, "test.csv"), blobs.test);
    dab::write_csv(join_path(a.out_dir, "ood.csv"), blobs.ood);
    std::cout << "wrote train.csv (" << blobs.train.n() << " rows), test.csv ("
              << blobs.test.n() << " rows), ood.csv (" << blobs.ood.n() << " rows)\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string config_path;
  std::string preset_name;
  std::string out_dir = ".";
  std::int64_t seed_override = -1;
  std::int64_t epochs_override = -1;
};

struct Materialized {
  dab::Dataset train;
  bool have_test = false;
  dab::Dataset test;
  bool have_ood = false;
  dab::Dataset ood;
};

Materialized materialize(const dab::DataConfig& d, std::uint64_t model_seed) {
  Materialized m;
  const std::uint64_t seed = d.seed ? d.seed : model_seed;
  if (d.source == dab::DataSource::Csv) {
    m.train = dab::load_csv(d.train_csv, d.target_column, d.normalize);
    return m;
  }
  if (d.generator == "cubic") {
    auto pair = dab::gen_cubic(seed, d.n_train);
    m.train = std::move(pair.train);
    m.test = std::move(pair.test);
    m.have_test = true;
  } else if (d.generator == "two-clusters") {
    auto pair = dab::gen_two_clusters(seed, d.n_per_cluster);
    m.train = std::move(pair.train);
    m.test = std::move(pair.test);
    m.have_test = true;
  } else {
    auto blobs = dab::gen_blobs(seed, d.blobs);
    m.train = std::move(blobs.train);
    m.test = std::move(blobs.test);
    m.ood = std::move(blobs.ood);
    m.have_test = true;
    m.have_ood = true;
  }
  return m;
}

dab::RunConfig load_train_config(const TrainArgs& a) {
  if (a.config_path.empty() == a.preset_name.empty())
    throw dab::ConfigError("pass exactly one of --config or --preset");
  dab::RunConfig rc = a.config_path.empty() ? dab::preset(a.preset_name)
                                            : dab::load_run_config(a.config_path);
  if (a.seed_override >= 0) rc.model.seed = static_cast<std::uint64_t>(a.seed_override);
  if (a.epochs_override >= 0) rc.model.epochs = static_cast<std::size_t>(a.epochs_override);
  return rc;
}

int cmd_train(const TrainArgs& a) {
  dab::RunConfig rc = load_train_config(a);
  Materialized data = materialize(rc.data, rc.model.seed);

  dab::DabConfig cfg = dab::resolve_config(rc.model, data.train);
  dab::DabModel model(cfg);
  if (data.train.normalized) {
    model.norm_mean = data.train.norm_mean;
    model.norm_std = data.train.norm_std;
  }

  dab::TrainReport rep = dab::train(model, data.train);
  for (std::size_t i = 0; i < rep.epochs.size(); ++i) {
    const auto& e = rep.epochs[i];
    std::cout << "epoch " << (i + 1) << " total=" << dab::format_double(e.total)
              << " nll=" << dab::format_double(e.nll)
              << " mi=" << dab::format_double(e.mi)
              << " distortion=" << dab::format_double(e.distortion)
              << " margin=" << dab::format_double(e.margin);
    if (cfg.task == dab::Task::Classification)
      std::cout << " accuracy=" << dab::format_double(e.accuracy);
    std::cout << "\n";
  }

  dab::save_model(model, join_path(a.out_dir, "model.dab"));
  write_text_file(join_path(a.out_dir, "train_report.csv"),
                  dab::train_report_csv(rep, cfg.task));
  std::cout << "saved model.dab, train_report.csv ("
            << dab::format_double(rep.wall_seconds) << "s)\n";
  return 0;
}

// --------------------------------------------------------------------------
// evaluation commands

struct EvalOodArgs {
  std::string model_path;
  std::string in_dist_csv;
  std::string ood_csv;
  std::string target;
  std::string out_path;
};

int cmd_eval_ood(const EvalOodArgs& a) {
  dab::DabModel model = dab::load_model(a.model_path);
  dab::Dataset in_dist = dab::load_csv(a.in_dist_csv, a.target, false);
  dab::Dataset ood = dab::load_csv(a.ood_csv, a.target, false);
  apply_model_normalization(model, in_dist);
  apply_model_normalization(model, ood);
  check_width(model, in_dist, "in-distribution table");
  check_width(model, ood, "ood table");

  // Positive label marks the OOD rows; the score is the model uncertainty.
  dab::ScoredLabels sl;
  for (double u : uncertainty_scores(model, in_dist)) {
    sl.scores.push_back(u);
    sl.labels.push_back(0);
  }
  for (double u : uncertainty_scores(model, ood)) {
    sl.scores.push_back(u);
    sl.labels.push_back(1);
  }

  json j;
  j["auroc"] = dab::auroc(sl);
  j["auprc"] = dab::auprc(sl);
  j["n_pos"] = ood.n();
  j["n_neg"] = in_dist.n();
  const std::string body = j.dump(2) + "\n";
  std::cout << body;
  if (!a.out_path.empty()) write_text_file(a.out_path, body);
  return 0;
}

struct EvalCalArgs {
  std::string model_path;
  std::string data_csv;
  std::string target = "y";
  std::string out_path;
};

int cmd_eval_calibration(const EvalCalArgs& a) {
  dab::DabModel model = dab::load_model(a.model_path);
  if (model.config().task != dab::Task::Classification)
    throw dab::ConfigError("calibration evaluation needs a classification model");
  dab::Dataset ds = dab::load_csv(a.data_csv, a.target, false);
  if (!ds.has_target) throw dab::ConfigError("calibration table needs a label column");
  apply_model_normalization(model, ds);
  check_width(model, ds, "calibration table");

  auto preds = model.predict_batch(ds.x);
  std::vector<double> unc;
  std::vector<int> correct;
  std::size_t n_correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool ok = preds[i].label == static_cast<int>(ds.y[i]);
    n_correct += ok ? 1 : 0;
    unc.push_back(preds[i].uncertainty);
    correct.push_back(ok ? 1 : 0);
  }

  json j;
  j["calibration_auroc"] = dab::calibration_auroc(unc, correct);
  j["accuracy"] = static_cast<double>(n_correct) / static_cast<double>(preds.size());
  j["n"] = preds.size();
  j["n_correct"] = n_correct;
  j["n_wrong"] = preds.size() - n_correct;
  const std::string body = j.dump(2) + "\n";
  std::cout << body;
  if (!a.out_path.empty()) write_text_file(a.out_path, body);
  return 0;
}

// --------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string model_path;
  std::string data_csv;
  std::string target;
  std::string out_path;
};

int cmd_score(const ScoreArgs& a) {
  dab::DabModel model = dab::load_model(a.model_path);
  dab::Dataset raw = dab::load_csv(a.data_csv, a.target, false);
  dab::Dataset ds = raw;
  apply_model_normalization(model, ds);
  check_width(model, ds, "input table");

  auto preds = model.predict_batch(ds.x);
  std::string body;
  for (std::size_t t = 0; t < raw.feature_names.size(); ++t) {
    if (t) body += ",";
    body += raw.feature_names[t];
  }
  body += ",prediction,uncertainty\n";
  for (std::size_t i = 0; i < raw.n(); ++i) {
    for (std::size_t t = 0; t < raw.x[i].size(); ++t) {
      if (t) body += ",";
      body += dab::format_double(raw.x[i][t]);
    }
    body += "," + dab::format_double(preds[i].value);
    body += "," + dab::format_double(preds[i].uncertainty);
    body += "\n";
  }
  if (a.out_path.empty()) {
    std::cout << body;
  } else {
    write_text_file(a.out_path, body);
    std::cout << "wrote " << a.out_path << " (" << raw.n() << " rows)\n";
  }
  return 0;
}

// --------------------------------------------------------------------------
// inspect-codebook

struct InspectArgs {
  std::string model_path;
  std::string data_csv;
  std::string target = "y";
  std::string out_dir;
};

int cmd_inspect_codebook(const InspectArgs& a) {
  dab::DabModel model = dab::load_model(a.model_path);
  dab::Dataset ds = dab::load_csv(a.data_csv, a.target, false);
  apply_model_normalization(model, ds);
  check_width(model, ds, "input table");

  const bool classify = model.config().task == dab::Task::Classification;
  if (classify && !ds.has_target)
    throw dab::ConfigError("codebook inspection of a classifier needs a label column");

  const std::size_t k = model.codebook().k();
  const std::size_t n_rows = classify ? model.config().num_classes : 1;
  std::vector<std::vector<std::size_t>> counts(n_rows, std::vector<std::size_t>(k, 0));

  auto encs = model.encode(ds.x);
  for (std::size_t i = 0; i < encs.size(); ++i) {
    auto d = dab::distances_to(model.codebook(), encs[i]);
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (d[j] < d[best]) best = j;  // tie keeps the lowest index
    std::size_t row = 0;
    if (classify) {
      const double label = ds.y[i];
      if (label < 0 || label >= static_cast<double>(n_rows))
        throw dab::ConfigError("label " + dab::format_double(label) +
                               " out of range for the model's classes");
      row = static_cast<std::size_t>(label);
    }
    counts[row][best] += 1;
  }

  std::string matrix = "class";
  for (std::size_t j = 0; j < k; ++j) matrix += ",c" + std::to_string(j);
  matrix += "\n";
  for (std::size_t r = 0; r < n_rows; ++r) {
    matrix += classify ? std::to_string(r) : std::string("all");
    for (std::size_t j = 0; j < k; ++j) matrix += "," + std::to_string(counts[r][j]);
    matrix += "\n";
  }

  std::vector<std::size_t> per_centroid(k, 0);
  std::vector<std::size_t> empty;
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < n_rows; ++r) per_centroid[j] += counts[r][j];
    if (per_centroid[j] == 0) empty.push_back(j);
  }
  json j;
  j["k"] = k;
  j["n"] = ds.n();
  j["per_centroid"] = per_centroid;
  j["empty_centroids"] = empty;
  const std::string summary = j.dump(2) + "\n";

  std::cout << summary;
  if (!a.out_dir.empty()) {
    write_text_file(join_path(a.out_dir, "assignment_counts.csv"), matrix);
    write_text_file(join_path(a.out_dir, "codebook_summary.json"), summary);
  } else {
    std::cout << matrix;
  }
  return 0;
}

// --------------------------------------------------------------------------
// rd-solve

struct RdArgs {
  std::string distortion_csv;
  std::string source_csv;
  std::string preset;
  double alpha = 1.0;
  double tol = 1e-12;
  std::size_t max_iters = 100000;
  std::string out_path;
};

int cmd_rd_solve(const RdArgs& a) {
  dab::DiscreteSource source;
  dab::DistortionMatrix dist;
  if (a.preset == "binary-hamming") {
    source.probs = {0.5, 0.5};
    dist.d = {{0.0, 1.0}, {1.0, 0.0}};
  } else {
    if (a.distortion_csv.empty() || a.source_csv.empty())
      throw dab::ConfigError("pass --distortion and --source, or --preset binary-hamming");
    dab::Dataset dm = dab::load_csv(a.distortion_csv, "", false);
    dist.d = dm.x;
    dab::Dataset sm = dab::load_csv(a.source_csv, "", false);
    for (const auto& row : sm.x) {
      if (row.size() != 1)
        throw dab::ConfigError("source csv must hold a single probability column");
      source.probs.push_back(row[0]);
    }
  }

  dab::RdSolution sol = dab::blahut_arimoto(source, dist, a.alpha, a.tol, a.max_iters);
  json j;
  j["rate"] = sol.rate;
  j["distortion"] = sol.distortion;
  j["lagrangian"] = sol.lagrangian;
  j["iterations"] = sol.iterations;
  j["marginal"] = sol.marginal;
  j["conditional"] = sol.conditional;
  const std::string body = j.dump(2) + "\n";
  std::cout << body;
  if (!a.out_path.empty()) write_text_file(a.out_path, body);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distance-aware bottleneck: train, evaluate and inspect"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* c_gen = app.add_subcommand("gen-data", "write a synthetic dataset as CSV");
  c_gen->add_option("generator", gen.generator, "cubic | two-clusters | blobs")
      ->required()
      ->check(CLI::IsMember({"cubic", "two-clusters", "blobs"}));
  c_gen->add_option("--seed", gen.seed, "generator seed");
  c_gen->add_option("--out-dir", gen.out_dir, "output directory");
  c_gen->add_option("--n-train", gen.n_train, "cubic: training rows");
  c_gen->add_option("--n-per-cluster", gen.n_per_cluster, "two-clusters: rows per cluster");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "train a model from a config or preset");
  c_train->add_option("--config", tr.config_path, "config file (text or JSON)");
  c_train->add_option("--preset", tr.preset_name, "named preset")
      ->check(CLI::IsMember(dab::preset_names()));
  c_train->add_option("--out-dir", tr.out_dir, "output directory");
  c_train->add_option("--seed", tr.seed_override, "override the config seed");
  c_train->add_option("--epochs", tr.epochs_override, "override the config epochs");

  EvalOodArgs eo;
  auto* c_ood = app.add_subcommand("eval-ood", "uncertainty-based OOD detection scores");
  c_ood->add_option("--model", eo.model_path)->required();
  c_ood->add_option("--in-dist", eo.in_dist_csv, "in-distribution csv")->required();
  c_ood->add_option("--ood", eo.ood_csv, "out-of-distribution csv")->required();
  c_ood->add_option("--target", eo.target, "label column to drop, if any");
  c_ood->add_option("--out", eo.out_path, "also write the JSON report here");

  EvalCalArgs ec;
  auto* c_cal = app.add_subcommand("eval-calibration",
                                   "does uncertainty rank the classifier's mistakes");
  c_cal->add_option("--model", ec.model_path)->required();
  c_cal->add_option("--data", ec.data_csv, "labeled csv")->required();
  c_cal->add_option("--target", ec.target, "label column name");
  c_cal->add_option("--out", ec.out_path, "also write the JSON report here");

  ScoreArgs sc;
  auto* c_score = app.add_subcommand("score", "prediction and uncertainty per row");
  c_score->add_option("--model", sc.model_path)->required();
  c_score->add_option("--data", sc.data_csv)->required();
  c_score->add_option("--target", sc.target, "label column to drop, if any");
  c_score->add_option("--out", sc.out_path, "write CSV here instead of stdout");

  InspectArgs in;
  auto* c_inspect = app.add_subcommand("inspect-codebook",
                                       "hard assignment counts per class and centroid");
  c_inspect->add_option("--model", in.model_path)->required();
  c_inspect->add_option("--data", in.data_csv)->required();
  c_inspect->add_option("--target", in.target, "label column name");
  c_inspect->add_option("--out-dir", in.out_dir, "write csv + json here");

  RdArgs rd;
  auto* c_rd = app.add_subcommand("rd-solve", "discrete rate-distortion point");
  c_rd->add_option("--distortion", rd.distortion_csv, "distortion matrix csv");
  c_rd->add_option("--source", rd.source_csv, "source probabilities csv (one column)");
  c_rd->add_option("--preset", rd.preset, "built-in problem")
      ->check(CLI::IsMember({"binary-hamming"}));
  c_rd->add_option("--alpha", rd.alpha, "distortion weight (0 pins rate at 0)");
  c_rd->add_option("--tol", rd.tol, "Lagrangian convergence tolerance");
  c_rd->add_option("--max-iters", rd.max_iters);
  c_rd->add_option("--out", rd.out_path, "also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_gen)) return cmd_gen_data(gen);
    if (app.got_subcommand(c_train)) return cmd_train(tr);
    if (app.got_subcommand(c_ood)) return cmd_eval_ood(eo);
    if (app.got_subcommand(c_cal)) return cmd_eval_calibration(ec);
    if (app.got_subcommand(c_score)) return cmd_score(sc);
    if (app.got_subcommand(c_inspect)) return cmd_inspect_codebook(in);
    if (app.got_subcommand(c_rd)) return cmd_rd_solve(rd);
  } catch (const dab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const dab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
