#include "dab/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "dab/errors.hpp"
#include "dab/numfmt.hpp"
#include "dab/optimizer.hpp"
#include "dab/rng.hpp"

namespace dab {

namespace {

// Separate stream for the reparameterization noise so that changing the
// network architecture (which changes how many init draws happen) does not
// shift the noise sequence.
constexpr std::uint64_t kNoiseStreamSalt = 0x9e3779b97f4a7c15ull;

std::string idx_name(const char* stem, std::size_t i) {
  return std::string(stem) + std::to_string(i);
}

Tensor weight_init(std::size_t rows, std::size_t cols, double gain, Rng& rng) {
  Tensor w = Tensor::zeros({rows, cols});
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : w.data) v = rng.uniform(-limit, limit);
  return w;
}

int argmax_row(const Tensor& t, std::size_t r) {
  int best = 0;
  double bv = t.at(r, 0);
  for (std::size_t c = 1; c < t.cols(); ++c) {
    if (t.at(r, c) > bv) {
      bv = t.at(r, c);
      best = static_cast<int>(c);
    }
  }
  return best;
}

Tensor draw_noise(Rng& rng, std::size_t batch, std::size_t dim) {
  Tensor t = Tensor::zeros({batch, dim});
  for (double& v : t.data) v = rng.normal();
  return t;
}

long long checked_label(double v, std::size_t num_classes) {
  if (!(v >= 0.0) || std::floor(v) != v || v >= 1e9)
    throw ConfigError("class labels must be small nonnegative integers, got " +
                      format_double(v));
  const long long l = static_cast<long long>(v);
  if (l >= static_cast<long long>(num_classes))
    throw ConfigError("label " + std::to_string(l) + " out of range for " +
                      std::to_string(num_classes) + " classes");
  return l;
}

}  // namespace

DabConfig resolve_config(DabConfig cfg, const Dataset& train) {
  if (!train.has_target) throw ConfigError("training table has no target column");
  if (train.n() == 0) throw ConfigError("training table is empty");
  cfg.input_dim = train.dim();
  if (cfg.task == Task::Classification) {
    long long max_label = -1;
    for (double v : train.y) {
      if (!(v >= 0.0) || std::floor(v) != v || v >= 1e9)
        throw ConfigError("class labels must be small nonnegative integers, got " +
                          format_double(v));
      max_label = std::max(max_label, static_cast<long long>(v));
    }
    if (cfg.num_classes == 0) cfg.num_classes = static_cast<std::size_t>(max_label + 1);
    if (cfg.num_classes < 2)
      throw ConfigError("classification needs at least 2 classes, labels imply " +
                        std::to_string(cfg.num_classes));
    if (max_label >= static_cast<long long>(cfg.num_classes))
      throw ConfigError("label " + std::to_string(max_label) +
                        " out of range for " + std::to_string(cfg.num_classes) +
                        " classes");
  }
  validate(cfg);
  return cfg;
}

DabModel::DabModel(DabConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  if (cfg_.input_dim == 0)
    throw ConfigError("input_dim is unresolved; call resolve_config against the training data first");
  if (cfg_.task == Task::Classification && cfg_.num_classes < 2)
    throw ConfigError("num_classes is unresolved; call resolve_config against the training data first");
  out_dim_ = cfg_.task == Task::Classification ? cfg_.num_classes : 1;

  Rng rng(cfg_.seed);
  std::size_t prev = cfg_.input_dim;
  for (std::size_t i = 0; i < cfg_.encoder_hidden.size(); ++i) {
    const std::size_t width = cfg_.encoder_hidden[i];
    g_.parameter(idx_name("enc.w", i), weight_init(prev, width, cfg_.init_gain, rng));
    g_.parameter(idx_name("enc.b", i), Tensor::zeros({width}));
    prev = width;
  }
  g_.parameter("enc.head_w", weight_init(prev, 2 * cfg_.latent_dim, cfg_.init_gain, rng));
  g_.parameter("enc.head_b", Tensor::zeros({2 * cfg_.latent_dim}));
  g_.parameter("dec.w", weight_init(cfg_.latent_dim, out_dim_, cfg_.init_gain, rng));
  g_.parameter("dec.b", Tensor::zeros({out_dim_}));

  cb_ = make_codebook(cfg_.k, cfg_.latent_dim, cfg_.alpha, cfg_.gamma, rng);
  for (std::size_t j = 0; j < cfg_.k; ++j) {
    Tensor m = Tensor::zeros({cfg_.latent_dim});
    m.data = cb_.centroids[j].mean;
    g_.parameter(idx_name("cb.mu", j), std::move(m));
  }

  build_graph();
}

NodeId DabModel::build_encoder(NodeId x) {
  NodeId h = x;
  for (std::size_t i = 0; i < cfg_.encoder_hidden.size(); ++i) {
    NodeId lin = g_.add(g_.matmul(h, g_.param_node(idx_name("enc.w", i))),
                        g_.param_node(idx_name("enc.b", i)));
    h = cfg_.activation == Activation::Elu ? g_.elu(lin) : g_.relu(lin);
  }
  return g_.add(g_.matmul(h, g_.param_node("enc.head_w")), g_.param_node("enc.head_b"));
}

void DabModel::build_graph() {
  const long long din = static_cast<long long>(cfg_.input_dim);
  const long long L = static_cast<long long>(cfg_.latent_dim);

  NodeId x = g_.placeholder("x", {-1, din});
  NodeId noise = g_.placeholder("noise", {-1, L});

  NodeId head = build_encoder(x);
  NodeId mu = g_.slice_cols(head, 0, cfg_.latent_dim);
  NodeId raw = g_.slice_cols(head, cfg_.latent_dim, 2 * cfg_.latent_dim);
  NodeId sigma = scale_from_raw_node(g_, raw);
  NodeId z = g_.add(mu, g_.mul(sigma, noise));
  NodeId pred = g_.add(g_.matmul(z, g_.param_node("dec.w")), g_.param_node("dec.b"));

  NodeId nll_row;
  if (cfg_.task == Task::Regression) {
    NodeId y = g_.placeholder("y", {-1, 1});
    NodeId d = g_.sub(pred, y);
    nll_row = g_.reduce_sum(g_.mul(g_.constant(0.5), g_.square(d)), 1);
  } else {
    NodeId onehot = g_.placeholder("onehot", {-1, static_cast<long long>(out_dim_)});
    NodeId lse = g_.logsumexp(pred, 1);
    NodeId picked = g_.reduce_sum(g_.mul(pred, onehot), 1);
    nll_row = g_.sub(lse, picked);
  }
  NodeId nll = g_.reduce_mean(nll_row);

  // Expected distance of each point to the codebook under its assignment.
  // The assignment weights are computed outside the graph against the
  // committed marginal and enter as inputs, so no gradient flows through
  // them; stop_gradient makes that explicit even if a future binding were
  // ever replaced by a differentiable subgraph.
  NodeId unc = -1;
  for (std::size_t j = 0; j < cfg_.k; ++j) {
    NodeId cmu = g_.param_node(idx_name("cb.mu", j));
    NodeId cscale = g_.placeholder(idx_name("cbs", j), {L});
    NodeId klj = kl_node(g_, mu, sigma, cmu, cscale);
    NodeId w = g_.stop_gradient(g_.placeholder(idx_name("pix", j), {-1}));
    NodeId contrib = g_.mul(w, klj);
    unc = j == 0 ? contrib : g_.add(unc, contrib);
  }

  NodeId mi = g_.placeholder("mi", {});
  NodeId dist;
  NodeId margin;
  if (cfg_.margin_enabled) {
    NodeId correct = g_.placeholder("correct_mask", {-1});
    NodeId wrong = g_.placeholder("wrong_mask", {-1});
    NodeId inv_c = g_.placeholder("inv_correct", {});
    NodeId inv_w = g_.placeholder("inv_wrong", {});
    dist = g_.mul(g_.reduce_sum(g_.mul(unc, correct)), inv_c);
    NodeId gap = g_.relu(g_.sub(g_.constant(cfg_.u_lb), unc));
    margin = g_.mul(g_.reduce_sum(g_.mul(gap, wrong)), inv_w);
  } else {
    dist = g_.reduce_mean(unc);
    margin = g_.constant(0.0);
  }

  NodeId loss = g_.add(g_.add(nll, g_.mul(mi, g_.constant(cfg_.beta))),
                       g_.mul(dist, g_.constant(cfg_.alpha * cfg_.beta)));
  if (cfg_.margin_enabled) loss = g_.add(loss, margin);

  g_.mark_output("mu", mu);
  g_.mark_output("sigma", sigma);
  g_.mark_output("pred", pred);
  g_.mark_output("uncertainty", unc);
  g_.mark_output("nll", nll);
  g_.mark_output("distortion", dist);
  g_.mark_output("margin", margin);
  g_.mark_output("loss", loss);
}

Tensor DabModel::zeros_noise(std::size_t batch) const {
  return Tensor::zeros({batch, cfg_.latent_dim});
}

DabModel::BatchContext DabModel::prepare_batch(
    const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t B = x.size();
  if (B == 0) throw ShapeError("empty batch");
  if (y.size() != B)
    throw ShapeError("batch has " + std::to_string(B) + " rows but " +
                     std::to_string(y.size()) + " targets");
  Tensor xt = Tensor::zeros({B, cfg_.input_dim});
  for (std::size_t i = 0; i < B; ++i) {
    if (x[i].size() != cfg_.input_dim)
      throw ShapeError("batch row " + std::to_string(i) + " has " +
                       std::to_string(x[i].size()) + " features, expected " +
                       std::to_string(cfg_.input_dim));
    for (std::size_t t = 0; t < cfg_.input_dim; ++t) xt.at(i, t) = x[i][t];
  }

  BatchContext ctx;
  ctx.bindings["x"] = xt;

  // Encoder statistics and the decoding at the mean come from a noise-free
  // pass; the caller binds the actual noise before the loss pass.
  {
    Bindings mean_pass = ctx.bindings;
    mean_pass["noise"] = zeros_noise(B);
    Exec ex(g_);
    ex.forward(mean_pass, {g_.output("mu"), g_.output("sigma"), g_.output("pred")});
    const Tensor& mu = ex.value(g_.output("mu"));
    const Tensor& sigma = ex.value(g_.output("sigma"));
    ctx.encoders.reserve(B);
    for (std::size_t i = 0; i < B; ++i) {
      DiagGaussian enc;
      enc.mean.assign(mu.data.begin() + i * cfg_.latent_dim,
                      mu.data.begin() + (i + 1) * cfg_.latent_dim);
      enc.scale.assign(sigma.data.begin() + i * cfg_.latent_dim,
                       sigma.data.begin() + (i + 1) * cfg_.latent_dim);
      ctx.encoders.push_back(std::move(enc));
    }
    if (cfg_.task == Task::Classification) {
      const Tensor& pred = ex.value(g_.output("pred"));
      ctx.pred_labels.resize(B);
      ctx.correct.resize(B);
      for (std::size_t i = 0; i < B; ++i) {
        const long long label = checked_label(y[i], cfg_.num_classes);
        ctx.pred_labels[i] = argmax_row(pred, i);
        ctx.correct[i] = ctx.pred_labels[i] == label ? 1 : 0;
      }
    }
  }

  ctx.distances.reserve(B);
  ctx.rows.reserve(B);
  for (std::size_t i = 0; i < B; ++i) {
    ctx.distances.push_back(distances_to(cb_, ctx.encoders[i]));
    ctx.rows.push_back(assignment_probs(ctx.distances.back(), cb_.pi, cb_.alpha));
  }

  // Targets.
  if (cfg_.task == Task::Regression) {
    Tensor yt = Tensor::zeros({B, 1});
    for (std::size_t i = 0; i < B; ++i) yt.at(i, 0) = y[i];
    ctx.bindings["y"] = std::move(yt);
  } else {
    Tensor oh = Tensor::zeros({B, out_dim_});
    for (std::size_t i = 0; i < B; ++i)
      oh.at(i, static_cast<std::size_t>(checked_label(y[i], cfg_.num_classes))) = 1.0;
    ctx.bindings["onehot"] = std::move(oh);
  }

  // Assignment columns and the codebook scales as they currently stand.
  for (std::size_t j = 0; j < cfg_.k; ++j) {
    Tensor col = Tensor::zeros({B});
    for (std::size_t i = 0; i < B; ++i) col.data[i] = ctx.rows[i][j];
    ctx.bindings[idx_name("pix", j)] = std::move(col);
    Tensor sc = Tensor::zeros({cfg_.latent_dim});
    sc.data = cb_.centroids[j].scale;
    ctx.bindings[idx_name("cbs", j)] = std::move(sc);
  }

  // Rate term, and with the margin active the correctness split. Both the
  // rate and the distortion are then restricted to correctly classified
  // points; a batch with none contributes zero.
  if (cfg_.margin_enabled) {
    Tensor cm = Tensor::zeros({B});
    Tensor wm = Tensor::zeros({B});
    std::vector<AssignmentRow> correct_rows;
    for (std::size_t i = 0; i < B; ++i) {
      if (ctx.correct[i]) {
        cm.data[i] = 1.0;
        correct_rows.push_back(ctx.rows[i]);
      } else {
        wm.data[i] = 1.0;
      }
    }
    const std::size_t nc = correct_rows.size();
    ctx.mi = nc == 0 ? 0.0 : mutual_information(correct_rows, cb_.pi);
    ctx.bindings["correct_mask"] = std::move(cm);
    ctx.bindings["wrong_mask"] = std::move(wm);
    ctx.bindings["inv_correct"] = Tensor::scalar(nc == 0 ? 0.0 : 1.0 / double(nc));
    ctx.bindings["inv_wrong"] =
        Tensor::scalar(nc == B ? 0.0 : 1.0 / double(B - nc));
  } else {
    ctx.mi = mutual_information(ctx.rows, cb_.pi);
  }
  ctx.bindings["mi"] = Tensor::scalar(ctx.mi);
  return ctx;
}

std::vector<DiagGaussian> DabModel::encode(const std::vector<std::vector<double>>& xs) {
  const std::size_t B = xs.size();
  if (B == 0) throw ShapeError("empty batch");
  Tensor xt = Tensor::zeros({B, cfg_.input_dim});
  for (std::size_t i = 0; i < B; ++i) {
    if (xs[i].size() != cfg_.input_dim)
      throw ShapeError("input row " + std::to_string(i) + " has " +
                       std::to_string(xs[i].size()) + " features, expected " +
                       std::to_string(cfg_.input_dim));
    for (std::size_t t = 0; t < cfg_.input_dim; ++t) xt.at(i, t) = xs[i][t];
  }
  Bindings b;
  b["x"] = std::move(xt);
  b["noise"] = zeros_noise(B);
  Exec ex(g_);
  ex.forward(b, {g_.output("mu"), g_.output("sigma")});
  const Tensor& mu = ex.value(g_.output("mu"));
  const Tensor& sigma = ex.value(g_.output("sigma"));
  std::vector<DiagGaussian> out(B);
  for (std::size_t i = 0; i < B; ++i) {
    out[i].mean.assign(mu.data.begin() + i * cfg_.latent_dim,
                       mu.data.begin() + (i + 1) * cfg_.latent_dim);
    out[i].scale.assign(sigma.data.begin() + i * cfg_.latent_dim,
                        sigma.data.begin() + (i + 1) * cfg_.latent_dim);
  }
  return out;
}

std::vector<DabModel::Prediction> DabModel::predict_batch(
    const std::vector<std::vector<double>>& xs) {
  const std::size_t B = xs.size();
  if (B == 0) throw ShapeError("empty batch");
  Tensor xt = Tensor::zeros({B, cfg_.input_dim});
  for (std::size_t i = 0; i < B; ++i) {
    if (xs[i].size() != cfg_.input_dim)
      throw ShapeError("input row " + std::to_string(i) + " has " +
                       std::to_string(xs[i].size()) + " features, expected " +
                       std::to_string(cfg_.input_dim));
    for (std::size_t t = 0; t < cfg_.input_dim; ++t) xt.at(i, t) = xs[i][t];
  }
  Bindings b;
  b["x"] = std::move(xt);
  b["noise"] = zeros_noise(B);
  Exec ex(g_);
  ex.forward(b, {g_.output("mu"), g_.output("sigma"), g_.output("pred")});
  const Tensor& mu = ex.value(g_.output("mu"));
  const Tensor& sigma = ex.value(g_.output("sigma"));
  const Tensor& pred = ex.value(g_.output("pred"));

  std::vector<Prediction> out(B);
  for (std::size_t i = 0; i < B; ++i) {
    DiagGaussian enc;
    enc.mean.assign(mu.data.begin() + i * cfg_.latent_dim,
                    mu.data.begin() + (i + 1) * cfg_.latent_dim);
    enc.scale.assign(sigma.data.begin() + i * cfg_.latent_dim,
                     sigma.data.begin() + (i + 1) * cfg_.latent_dim);
    out[i].uncertainty = uncertainty(cb_, enc);
    if (cfg_.task == Task::Regression) {
      out[i].value = pred.at(i, 0);
      out[i].label = -1;
    } else {
      out[i].label = argmax_row(pred, i);
      out[i].value = static_cast<double>(out[i].label);
    }
  }
  return out;
}

DabModel::Prediction DabModel::predict_with_uncertainty(const std::vector<double>& x) {
  return predict_batch({x})[0];
}

std::vector<std::string> DabModel::theta_param_names() const {
  std::vector<std::string> out;
  for (const std::string& n : g_.param_names())
    if (n.rfind("enc.", 0) == 0 || n.rfind("dec.", 0) == 0) out.push_back(n);
  return out;
}

std::vector<std::string> DabModel::phi_param_names() const {
  std::vector<std::string> out;
  for (const std::string& n : g_.param_names())
    if (n.rfind("cb.", 0) == 0) out.push_back(n);
  return out;
}

void DabModel::sync_codebook_means_from_graph() {
  for (std::size_t j = 0; j < cfg_.k; ++j)
    cb_.centroids[j].mean = g_.param(idx_name("cb.mu", j)).data;
}

TrainReport train(DabModel& model, const Dataset& ds) {
  const DabConfig& cfg = model.config();
  if (!ds.has_target) throw ConfigError("training table has no target column");
  if (ds.n() == 0) throw ConfigError("training table is empty");
  if (ds.dim() != cfg.input_dim)
    throw ConfigError("config input_dim " + std::to_string(cfg.input_dim) +
                      " does not match table width " + std::to_string(ds.dim()));

  const std::size_t n = ds.n();
  const std::size_t bs = cfg.batch_size == 0 ? n : std::min(cfg.batch_size, n);
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t i = 0; i < n; i += bs) batches.emplace_back(i, std::min(i + bs, n));

  Graph& g = model.graph();
  const NodeId loss_id = g.output("loss");
  const NodeId nll_id = g.output("nll");
  const NodeId dist_id = g.output("distortion");
  const NodeId margin_id = g.output("margin");

  Optimizer opt_theta = Optimizer::adam(cfg.lr_theta, model.theta_param_names());
  Optimizer opt_phi = Optimizer::adam(cfg.lr_phi, model.phi_param_names());
  Rng noise_rng(cfg.seed ^ kNoiseStreamSalt);
  Codebook& cb = model.codebook();

  auto slice_x = [&](std::size_t lo, std::size_t hi) {
    return std::vector<std::vector<double>>(ds.x.begin() + lo, ds.x.begin() + hi);
  };
  auto slice_y = [&](std::size_t lo, std::size_t hi) {
    return std::vector<double>(ds.y.begin() + lo, ds.y.begin() + hi);
  };
  // With the margin active the codebook phases see only the correctly
  // classified points of each batch.
  auto select_rows = [&](const DabModel::BatchContext& ctx,
                         std::vector<DiagGaussian>* encs) {
    std::vector<AssignmentRow> rows;
    if (!cfg.margin_enabled) {
      rows = ctx.rows;
      if (encs) *encs = ctx.encoders;
      return rows;
    }
    for (std::size_t i = 0; i < ctx.rows.size(); ++i) {
      if (!ctx.correct[i]) continue;
      rows.push_back(ctx.rows[i]);
      if (encs) encs->push_back(ctx.encoders[i]);
    }
    return rows;
  };

  TrainReport rep;
  rep.epochs.reserve(cfg.epochs);
  const auto t0 = std::chrono::steady_clock::now();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    TrainReport::Epoch row;
    double sum_total = 0, sum_nll = 0, sum_mi = 0, sum_dist = 0, sum_margin = 0;
    std::size_t n_correct = 0;

    // Network pass. The logged loss terms come from here, before the step,
    // so the decomposition total = nll + beta*mi + alpha*beta*distortion +
    // margin holds exactly per batch.
    for (auto [lo, hi] : batches) {
      auto ctx = model.prepare_batch(slice_x(lo, hi), slice_y(lo, hi));
      const double w = static_cast<double>(hi - lo);
      ctx.bindings["noise"] = draw_noise(noise_rng, hi - lo, cfg.latent_dim);
      Exec ex(g);
      ex.forward(ctx.bindings, {loss_id, nll_id, dist_id, margin_id});
      auto grads = ex.backward(loss_id);
      sum_total += ex.value(loss_id).data[0] * w;
      sum_nll += ex.value(nll_id).data[0] * w;
      sum_dist += ex.value(dist_id).data[0] * w;
      sum_margin += ex.value(margin_id).data[0] * w;
      sum_mi += ctx.mi * w;
      for (int c : ctx.correct) n_correct += static_cast<std::size_t>(c);
      opt_theta.step(g, grads);
    }

    // Codebook mean pass, with the closed-form variance refit accumulated
    // against the pre-step snapshot of each batch and committed at the end.
    reset_covariance_accumulators(cb);
    for (auto [lo, hi] : batches) {
      auto ctx = model.prepare_batch(slice_x(lo, hi), slice_y(lo, hi));
      std::vector<DiagGaussian> encs;
      auto rows = select_rows(ctx, &encs);
      if (!rows.empty()) accumulate_covariances(cb, encs, rows);
      ctx.bindings["noise"] = draw_noise(noise_rng, hi - lo, cfg.latent_dim);
      Exec ex(g);
      ex.forward(ctx.bindings, {loss_id});
      auto grads = ex.backward(loss_id);
      opt_phi.step(g, grads);
      model.sync_codebook_means_from_graph();
    }
    commit_covariances(cb);

    // Marginal pass: moving average over the batch assignments, committed
    // as the new marginal for the next epoch.
    reset_marginal_ma(cb);
    for (auto [lo, hi] : batches) {
      auto ctx = model.prepare_batch(slice_x(lo, hi), slice_y(lo, hi));
      auto rows = select_rows(ctx, nullptr);
      if (!rows.empty()) update_marginal(cb, rows);
    }
    commit_marginal(cb);

    row.total = sum_total / double(n);
    row.nll = sum_nll / double(n);
    row.mi = sum_mi / double(n);
    row.distortion = sum_dist / double(n);
    row.margin = sum_margin / double(n);
    if (cfg.task == Task::Classification)
      row.accuracy = static_cast<double>(n_correct) / double(n);
    rep.epochs.push_back(row);
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string train_report_csv(const TrainReport& rep, Task task) {
  std::ostringstream out;
  out << "epoch,total,nll,mi,distortion,margin";
  if (task == Task::Classification) out << ",accuracy";
  out << "\n";
  for (std::size_t i = 0; i < rep.epochs.size(); ++i) {
    const auto& e = rep.epochs[i];
    out << (i + 1) << "," << format_double(e.total) << "," << format_double(e.nll)
        << "," << format_double(e.mi) << "," << format_double(e.distortion) << ","
        << format_double(e.margin);
    if (task == Task::Classification) out << "," << format_double(e.accuracy);
    out << "\n";
  }
  return out.str();
}

}  // namespace dab
