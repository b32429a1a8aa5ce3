#include "dab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dab/errors.hpp"

namespace dab {

namespace {

using nlohmann::json;

const std::vector<std::string> kKnownKeys = {
    "task", "mode", "latent_dim", "num_classes", "encoder_hidden", "activation",
    "k", "beta", "alpha", "gamma", "lr_theta", "lr_phi", "init_gain", "epochs", "batch_size",
    "seed", "margin_enabled", "u_lb",
    "dataset.source", "dataset.generator", "dataset.seed", "dataset.n_train",
    "dataset.n_per_cluster", "dataset.centers", "dataset.stddev",
    "dataset.n_per_center_train", "dataset.n_per_center_test", "dataset.ood_center",
    "dataset.ood_n", "dataset.train_csv", "dataset.target_column", "dataset.normalize",
};

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// The text format is flat "dotted.key = value" lines; build the same
// nested json the JSON encoding produces, with every leaf as a string.
json text_to_json(const std::string& text) {
  json root = json::object();
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    json* node = &root;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (dot == std::string::npos) {
        if (node->contains(part)) {
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": duplicate key '" + key + "'");
        }
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return root;
}

void collect_leaf_paths(const json& j, const std::string& prefix,
                        std::vector<std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
      if (it.value().is_object()) {
        collect_leaf_paths(it.value(), path, out);
      } else {
        out.push_back(path);
      }
    }
  }
}

// Pulls typed values out of the parsed tree, collecting every problem
// instead of stopping at the first.
class Extractor {
 public:
  explicit Extractor(json j) : j_(std::move(j)) {}

  const json* find(const std::string& path) const {
    const json* node = &j_;
    std::size_t start = 0;
    while (true) {
      const std::size_t dot = path.find('.', start);
      const std::string part = path.substr(start, dot - start);
      if (!node->is_object() || !node->contains(part)) return nullptr;
      node = &(*node)[part];
      if (dot == std::string::npos) return node;
      start = dot + 1;
    }
  }

  void fail(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }

  bool get_double(const std::string& path, double& out) {
    const json* v = find(path);
    if (!v) return false;
    if (v->is_number()) {
      out = v->get<double>();
      return true;
    }
    if (v->is_string()) {
      const std::string s = v->get<std::string>();
      try {
        std::size_t used = 0;
        out = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return true;
      } catch (const std::exception&) {
        fail(path, "not a number: '" + s + "'");
        return false;
      }
    }
    fail(path, "expected a number");
    return false;
  }

  bool get_size(const std::string& path, std::size_t& out) {
    double d = 0.0;
    if (!get_double(path, d)) return false;
    if (d < 0.0 || d != std::floor(d) || d > 9e15) {
      fail(path, "expected a nonnegative integer, got " + fmt_double(d));
      return false;
    }
    out = static_cast<std::size_t>(d);
    return true;
  }

  bool get_u64(const std::string& path, std::uint64_t& out) {
    std::size_t s = 0;
    if (!get_size(path, s)) return false;
    out = static_cast<std::uint64_t>(s);
    return true;
  }

  bool get_bool(const std::string& path, bool& out) {
    const json* v = find(path);
    if (!v) return false;
    if (v->is_boolean()) {
      out = v->get<bool>();
      return true;
    }
    if (v->is_string()) {
      const std::string s = v->get<std::string>();
      if (s == "true" || s == "1") {
        out = true;
        return true;
      }
      if (s == "false" || s == "0") {
        out = false;
        return true;
      }
    }
    fail(path, "expected true or false");
    return false;
  }

  bool get_string(const std::string& path, std::string& out) {
    const json* v = find(path);
    if (!v) return false;
    if (v->is_string()) {
      out = v->get<std::string>();
      return true;
    }
    fail(path, "expected a string");
    return false;
  }

  // list of sizes: json array or "100,100"
  bool get_sizes(const std::string& path, std::vector<std::size_t>& out) {
    const json* v = find(path);
    if (!v) return false;
    std::vector<double> vals;
    if (v->is_array()) {
      for (const auto& e : *v) {
        if (!e.is_number()) {
          fail(path, "expected an array of integers");
          return false;
        }
        vals.push_back(e.get<double>());
      }
    } else if (v->is_string()) {
      std::istringstream ss(v->get<std::string>());
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          vals.push_back(std::stod(trim(part)));
        } catch (const std::exception&) {
          fail(path, "not an integer list: '" + v->get<std::string>() + "'");
          return false;
        }
      }
    } else {
      fail(path, "expected an integer list");
      return false;
    }
    out.clear();
    for (double d : vals) {
      if (d < 0.0 || d != std::floor(d)) {
        fail(path, "expected nonnegative integers");
        return false;
      }
      out.push_back(static_cast<std::size_t>(d));
    }
    return true;
  }

  // one point: json array of numbers or "a,b"
  bool parse_point(const std::string& path, const json& v, std::vector<double>& out) {
    out.clear();
    if (v.is_array()) {
      for (const auto& e : v) {
        if (!e.is_number()) {
          fail(path, "expected numeric coordinates");
          return false;
        }
        out.push_back(e.get<double>());
      }
      return true;
    }
    if (v.is_string()) {
      std::istringstream ss(v.get<std::string>());
      std::string part;
      while (std::getline(ss, part, ',')) {
        try {
          out.push_back(std::stod(trim(part)));
        } catch (const std::exception&) {
          fail(path, "not a point: '" + v.get<std::string>() + "'");
          return false;
        }
      }
      return true;
    }
    fail(path, "expected a point");
    return false;
  }

  bool get_point(const std::string& path, std::vector<double>& out) {
    const json* v = find(path);
    if (!v) return false;
    return parse_point(path, *v, out);
  }

  // list of points: json array of arrays or "a,b; c,d"
  bool get_points(const std::string& path, std::vector<std::vector<double>>& out) {
    const json* v = find(path);
    if (!v) return false;
    out.clear();
    if (v->is_array()) {
      for (const auto& e : *v) {
        std::vector<double> p;
        if (!parse_point(path, e, p)) return false;
        out.push_back(std::move(p));
      }
      return true;
    }
    if (v->is_string()) {
      std::istringstream ss(v->get<std::string>());
      std::string part;
      while (std::getline(ss, part, ';')) {
        std::vector<double> p;
        if (!parse_point(path, json(trim(part)), p)) return false;
        out.push_back(std::move(p));
      }
      return true;
    }
    fail(path, "expected a list of points");
    return false;
  }

  std::vector<std::string> errors;

 private:
  json j_;
};

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw ConfigError("config is empty");

  json tree;
  if (text[first] == '{') {
    try {
      tree = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  } else {
    tree = text_to_json(text);
  }
  if (!tree.is_object()) throw ConfigError("config must be a key/value object");

  // Reject unknown keys up front, all at once.
  std::vector<std::string> paths;
  collect_leaf_paths(tree, "", paths);

  Extractor ex(std::move(tree));
  for (const auto& p : paths) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), p) == kKnownKeys.end()) {
      ex.fail(p, "unknown key");
    }
  }

  RunConfig rc;
  std::string s;
  if (ex.get_string("task", s)) {
    if (s == "regression") {
      rc.model.task = Task::Regression;
    } else if (s == "classification") {
      rc.model.task = Task::Classification;
    } else {
      ex.fail("task", "expected regression or classification, got '" + s + "'");
    }
  }
  if (ex.get_string("mode", s)) {
    if (s == "dab") {
      rc.model.mode = TrainMode::Dab;
    } else if (s == "vib") {
      rc.model.mode = TrainMode::Vib;
    } else {
      ex.fail("mode", "expected dab or vib, got '" + s + "'");
    }
  }
  if (ex.get_string("activation", s)) {
    if (s == "elu") {
      rc.model.activation = Activation::Elu;
    } else if (s == "relu") {
      rc.model.activation = Activation::Relu;
    } else {
      ex.fail("activation", "expected elu or relu, got '" + s + "'");
    }
  }
  ex.get_size("latent_dim", rc.model.latent_dim);
  ex.get_size("num_classes", rc.model.num_classes);
  ex.get_sizes("encoder_hidden", rc.model.encoder_hidden);
  ex.get_size("k", rc.model.k);
  ex.get_double("beta", rc.model.beta);
  ex.get_double("alpha", rc.model.alpha);
  ex.get_double("gamma", rc.model.gamma);
  ex.get_double("lr_theta", rc.model.lr_theta);
  ex.get_double("lr_phi", rc.model.lr_phi);
  ex.get_double("init_gain", rc.model.init_gain);
  ex.get_size("epochs", rc.model.epochs);
  ex.get_size("batch_size", rc.model.batch_size);
  ex.get_u64("seed", rc.model.seed);
  ex.get_bool("margin_enabled", rc.model.margin_enabled);
  ex.get_double("u_lb", rc.model.u_lb);

  if (ex.get_string("dataset.source", s)) {
    if (s == "generator") {
      rc.data.source = DataSource::Generator;
    } else if (s == "csv") {
      rc.data.source = DataSource::Csv;
    } else {
      ex.fail("dataset.source", "expected generator or csv, got '" + s + "'");
    }
  }
  ex.get_string("dataset.generator", rc.data.generator);
  ex.get_u64("dataset.seed", rc.data.seed);
  ex.get_size("dataset.n_train", rc.data.n_train);
  ex.get_size("dataset.n_per_cluster", rc.data.n_per_cluster);
  ex.get_points("dataset.centers", rc.data.blobs.centers);
  ex.get_double("dataset.stddev", rc.data.blobs.stddev);
  ex.get_size("dataset.n_per_center_train", rc.data.blobs.n_per_center_train);
  ex.get_size("dataset.n_per_center_test", rc.data.blobs.n_per_center_test);
  ex.get_point("dataset.ood_center", rc.data.blobs.ood_center);
  ex.get_size("dataset.ood_n", rc.data.blobs.ood_n);
  ex.get_string("dataset.train_csv", rc.data.train_csv);
  ex.get_string("dataset.target_column", rc.data.target_column);
  ex.get_bool("dataset.normalize", rc.data.normalize);

  // Semantic checks, still collecting.
  const DabConfig& m = rc.model;
  if (!(m.beta >= 0.0) || !std::isfinite(m.beta)) ex.fail("beta", "must be >= 0");
  if (!(m.alpha >= 0.0) || !std::isfinite(m.alpha)) ex.fail("alpha", "must be >= 0");
  if (!(m.gamma >= 0.0 && m.gamma <= 1.0)) ex.fail("gamma", "must lie in [0,1]");
  if (m.latent_dim < 1) ex.fail("latent_dim", "must be >= 1");
  if (m.k < 1) ex.fail("k", "must be >= 1");
  if (!(m.lr_theta > 0.0)) ex.fail("lr_theta", "must be > 0");
  if (!(m.lr_phi > 0.0)) ex.fail("lr_phi", "must be > 0");
  if (!(m.init_gain > 0.0) || !std::isfinite(m.init_gain)) ex.fail("init_gain", "must be > 0");
  if (!(m.u_lb >= 0.0)) ex.fail("u_lb", "must be >= 0");
  for (std::size_t h : m.encoder_hidden) {
    if (h < 1) {
      ex.fail("encoder_hidden", "layer widths must be >= 1");
      break;
    }
  }
  if (m.mode == TrainMode::Vib && m.k != 1) ex.fail("k", "vib mode requires k = 1");
  if (m.margin_enabled && m.task != Task::Classification) {
    ex.fail("margin_enabled", "margin loss needs a classification task");
  }
  if (m.task == Task::Classification && m.num_classes == 1) {
    ex.fail("num_classes", "must be 0 (infer) or >= 2");
  }
  if (rc.data.source == DataSource::Csv && rc.data.train_csv.empty()) {
    ex.fail("dataset.train_csv", "required when dataset.source = csv");
  }
  if (rc.data.source == DataSource::Generator) {
    const std::string& g = rc.data.generator;
    if (g != "cubic" && g != "two-clusters" && g != "blobs") {
      ex.fail("dataset.generator", "expected cubic, two-clusters or blobs, got '" + g + "'");
    }
  }

  if (!ex.errors.empty()) {
    std::string msg = "invalid config (" + std::to_string(ex.errors.size()) + " problems):";
    for (const auto& e : ex.errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  validate(rc.model);
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void validate(const DabConfig& c) {
  // parse_run_config collects these with key context; this is the last
  // line of defense for configs built in code.
  if (!(c.beta >= 0.0) || !(c.alpha >= 0.0) || !(c.gamma >= 0.0 && c.gamma <= 1.0) ||
      c.latent_dim < 1 || c.k < 1 || !(c.lr_theta > 0.0) || !(c.lr_phi > 0.0) ||
      !(c.init_gain > 0.0) || !std::isfinite(c.init_gain) || !(c.u_lb >= 0.0)) {
    throw ConfigError("model hyperparameters out of range");
  }
  if (c.mode == TrainMode::Vib && c.k != 1) {
    throw ConfigError("vib mode requires k = 1");
  }
  if (c.margin_enabled && c.task != Task::Classification) {
    throw ConfigError("margin loss needs a classification task");
  }
}

namespace {

std::string points_to_text(const std::vector<std::vector<double>>& pts) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += "; ";
    for (std::size_t j = 0; j < pts[i].size(); ++j) {
      if (j) out += ",";
      out += fmt_double(pts[i][j]);
    }
  }
  return out;
}

}  // namespace

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  const DabConfig& m = c.model;
  o << "task = " << (m.task == Task::Regression ? "regression" : "classification") << "\n";
  o << "mode = " << (m.mode == TrainMode::Dab ? "dab" : "vib") << "\n";
  o << "latent_dim = " << m.latent_dim << "\n";
  if (m.num_classes) o << "num_classes = " << m.num_classes << "\n";
  o << "encoder_hidden = ";
  for (std::size_t i = 0; i < m.encoder_hidden.size(); ++i) {
    if (i) o << ",";
    o << m.encoder_hidden[i];
  }
  o << "\n";
  o << "activation = " << (m.activation == Activation::Elu ? "elu" : "relu") << "\n";
  o << "k = " << m.k << "\n";
  o << "beta = " << fmt_double(m.beta) << "\n";
  o << "alpha = " << fmt_double(m.alpha) << "\n";
  o << "gamma = " << fmt_double(m.gamma) << "\n";
  o << "lr_theta = " << fmt_double(m.lr_theta) << "\n";
  o << "lr_phi = " << fmt_double(m.lr_phi) << "\n";
  o << "init_gain = " << fmt_double(m.init_gain) << "\n";
  o << "epochs = " << m.epochs << "\n";
  o << "batch_size = " << m.batch_size << "\n";
  o << "seed = " << m.seed << "\n";
  o << "margin_enabled = " << (m.margin_enabled ? "true" : "false") << "\n";
  if (m.margin_enabled) o << "u_lb = " << fmt_double(m.u_lb) << "\n";

  const DataConfig& d = c.data;
  if (d.source == DataSource::Generator) {
    o << "dataset.source = generator\n";
    o << "dataset.generator = " << d.generator << "\n";
    if (d.seed) o << "dataset.seed = " << d.seed << "\n";
    if (d.generator == "cubic") {
      o << "dataset.n_train = " << d.n_train << "\n";
    } else if (d.generator == "two-clusters") {
      o << "dataset.n_per_cluster = " << d.n_per_cluster << "\n";
    } else if (d.generator == "blobs") {
      o << "dataset.centers = " << points_to_text(d.blobs.centers) << "\n";
      o << "dataset.stddev = " << fmt_double(d.blobs.stddev) << "\n";
      o << "dataset.n_per_center_train = " << d.blobs.n_per_center_train << "\n";
      o << "dataset.n_per_center_test = " << d.blobs.n_per_center_test << "\n";
      o << "dataset.ood_center = " << points_to_text({d.blobs.ood_center}) << "\n";
      o << "dataset.ood_n = " << d.blobs.ood_n << "\n";
    }
  } else {
    o << "dataset.source = csv\n";
    o << "dataset.train_csv = " << d.train_csv << "\n";
    o << "dataset.target_column = " << d.target_column << "\n";
    o << "dataset.normalize = " << (d.normalize ? "true" : "false") << "\n";
  }
  return o.str();
}

std::string to_json(const RunConfig& c) {
  json j;
  const DabConfig& m = c.model;
  j["task"] = m.task == Task::Regression ? "regression" : "classification";
  j["mode"] = m.mode == TrainMode::Dab ? "dab" : "vib";
  j["latent_dim"] = m.latent_dim;
  if (m.num_classes) j["num_classes"] = m.num_classes;
  j["encoder_hidden"] = m.encoder_hidden;
  j["activation"] = m.activation == Activation::Elu ? "elu" : "relu";
  j["k"] = m.k;
  j["beta"] = m.beta;
  j["alpha"] = m.alpha;
  j["gamma"] = m.gamma;
  j["lr_theta"] = m.lr_theta;
  j["lr_phi"] = m.lr_phi;
  j["init_gain"] = m.init_gain;
  j["epochs"] = m.epochs;
  j["batch_size"] = m.batch_size;
  j["seed"] = m.seed;
  j["margin_enabled"] = m.margin_enabled;
  if (m.margin_enabled) j["u_lb"] = m.u_lb;

  const DataConfig& d = c.data;
  json jd;
  if (d.source == DataSource::Generator) {
    jd["source"] = "generator";
    jd["generator"] = d.generator;
    if (d.seed) jd["seed"] = d.seed;
    if (d.generator == "cubic") {
      jd["n_train"] = d.n_train;
    } else if (d.generator == "two-clusters") {
      jd["n_per_cluster"] = d.n_per_cluster;
    } else if (d.generator == "blobs") {
      jd["centers"] = d.blobs.centers;
      jd["stddev"] = d.blobs.stddev;
      jd["n_per_center_train"] = d.blobs.n_per_center_train;
      jd["n_per_center_test"] = d.blobs.n_per_center_test;
      jd["ood_center"] = d.blobs.ood_center;
      jd["ood_n"] = d.blobs.ood_n;
    }
  } else {
    jd["source"] = "csv";
    jd["train_csv"] = d.train_csv;
    jd["target_column"] = d.target_column;
    jd["normalize"] = d.normalize;
  }
  j["dataset"] = jd;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Presets

namespace {

RunConfig preset_cubic_k1() {
  RunConfig c;  // struct defaults are already the synthetic-regression values
  c.model.k = 1;
  // A 1e-3 rate leaves the cubic fit visibly short of converged after 1500
  // full-batch steps; 4e-3 reaches the optimum within the budget without
  // destabilizing any seed we tested. The wider init keeps the encoder's
  // posterior spread from collapsing onto the 20-point fit, which is what
  // the far-from-data uncertainty signal lives on.
  c.model.lr_theta = 4e-3;
  c.model.init_gain = 2.0;
  c.data.source = DataSource::Generator;
  c.data.generator = "cubic";
  c.data.n_train = 20;
  return c;
}

RunConfig preset_two_cluster_k2() {
  RunConfig c;
  c.model.k = 2;
  c.model.lr_theta = 3e-3;
  // With only 10 points per cluster the gap between clusters sits on the
  // straight line between the two codebook cells; a wide init gives the
  // encoder enough curvature there that the gap reads as unfamiliar
  // instead of as a smooth interpolation.
  c.model.init_gain = 4.0;
  c.data.generator = "two-clusters";
  c.data.n_per_cluster = 10;
  return c;
}

RunConfig preset_tabular() {
  RunConfig c;
  c.model.task = Task::Regression;
  c.model.latent_dim = 4;
  c.model.encoder_hidden = {50};
  c.model.activation = Activation::Relu;
  c.model.k = 2;
  c.model.beta = 0.001;
  c.model.alpha = 1.0;
  c.model.gamma = 0.99;
  c.model.lr_theta = 1e-3;
  c.model.lr_phi = 0.1;
  c.model.epochs = 100;
  c.model.batch_size = 100;
  c.data.source = DataSource::Csv;
  c.data.train_csv = "data/train.csv";
  c.data.target_column = "y";
  c.data.normalize = true;
  return c;
}

RunConfig preset_cifar10() {
  RunConfig c;
  c.model.task = Task::Classification;
  c.model.num_classes = 10;
  c.model.latent_dim = 8;
  c.model.encoder_hidden = {512};
  c.model.k = 10;
  c.model.beta = 0.001;
  c.model.alpha = 1.0;
  c.model.gamma = 0.99;
  c.model.lr_phi = 1e-2;
  c.model.epochs = 100;
  c.model.batch_size = 128;
  c.data.source = DataSource::Csv;
  c.data.train_csv = "data/train.csv";
  c.data.target_column = "label";
  c.data.normalize = true;
  return c;
}

RunConfig preset_imagenet(bool finetuned, bool calibration) {
  RunConfig c;
  c.model.task = Task::Classification;
  c.model.num_classes = 1000;
  c.model.latent_dim = 80;
  c.model.encoder_hidden = {512};
  c.model.k = 1000;
  c.model.alpha = 2.0;
  c.model.gamma = 0.99;
  c.model.epochs = 30;
  c.model.batch_size = 256;
  if (calibration) {
    c.model.beta = finetuned ? 0.01 : 0.02;
    c.model.lr_phi = 0.1;
    c.model.margin_enabled = true;
    c.model.u_lb = 100.0;
  } else {
    c.model.beta = finetuned ? 0.005 : 0.0025;
    c.model.lr_phi = 0.4;
  }
  c.data.source = DataSource::Csv;
  c.data.train_csv = "data/train.csv";
  c.data.target_column = "label";
  c.data.normalize = true;
  return c;
}

RunConfig preset_blob_ood() {
  RunConfig c;
  c.model.task = Task::Classification;
  c.model.latent_dim = 4;
  c.model.encoder_hidden = {32, 32};
  c.model.k = 4;
  c.model.beta = 0.01;
  c.model.alpha = 1.0;
  c.model.gamma = 0.9;
  c.model.lr_theta = 3e-3;
  c.model.lr_phi = 1e-2;
  c.model.epochs = 150;
  c.model.batch_size = 64;
  c.data.generator = "blobs";
  c.data.blobs.centers = {{-3, -3}, {-3, 3}, {3, -3}, {3, 3}};
  c.data.blobs.stddev = 0.5;
  c.data.blobs.n_per_center_train = 100;
  c.data.blobs.n_per_center_test = 50;
  c.data.blobs.ood_center = {6.5, 6.5};  // ~10 stddevs past the nearest blob
  c.data.blobs.ood_n = 200;
  return c;
}

RunConfig preset_blob_calibration(bool margin) {
  RunConfig c;
  c.model.task = Task::Classification;
  c.model.latent_dim = 4;
  c.model.encoder_hidden = {32, 32};
  c.model.k = 3;
  c.model.beta = 0.01;
  c.model.alpha = 1.0;
  c.model.gamma = 0.9;
  c.model.lr_theta = 3e-3;
  c.model.lr_phi = 1e-2;
  c.model.epochs = 150;
  c.model.batch_size = 64;
  c.model.margin_enabled = margin;
  c.model.u_lb = 10.0;
  c.data.generator = "blobs";
  // Overlapping blobs: stddev comparable to the center spacing, so some
  // test points land on the wrong side and stay irreducibly ambiguous.
  c.data.blobs.centers = {{0.0, 1.2}, {-1.04, -0.6}, {1.04, -0.6}};
  c.data.blobs.stddev = 0.9;
  c.data.blobs.n_per_center_train = 120;
  c.data.blobs.n_per_center_test = 80;
  c.data.blobs.ood_center = {0.0, 0.0};
  c.data.blobs.ood_n = 0;
  return c;
}

}  // namespace

RunConfig preset(const std::string& name) {
  if (name == "cubic-k1") return preset_cubic_k1();
  if (name == "two-cluster-k2") return preset_two_cluster_k2();
  if (name == "tabular") return preset_tabular();
  if (name == "cifar10") return preset_cifar10();
  if (name == "imagenet-finetuned-ood") return preset_imagenet(true, false);
  if (name == "imagenet-finetuned-calibration") return preset_imagenet(true, true);
  if (name == "imagenet-pretrained-ood") return preset_imagenet(false, false);
  if (name == "imagenet-pretrained-calibration") return preset_imagenet(false, true);
  if (name == "blob-ood") return preset_blob_ood();
  if (name == "blob-calibration") return preset_blob_calibration(false);
  if (name == "blob-calibration-margin") return preset_blob_calibration(true);
  std::string msg = "unknown preset '" + name + "'; valid presets:";
  for (const auto& n : preset_names()) msg += " " + n;
  throw ConfigError(msg);
}

std::vector<std::string> preset_names() {
  return {"cubic-k1",
          "two-cluster-k2",
          "tabular",
          "cifar10",
          "imagenet-finetuned-ood",
          "imagenet-finetuned-calibration",
          "imagenet-pretrained-ood",
          "imagenet-pretrained-calibration",
          "blob-ood",
          "blob-calibration",
          "blob-calibration-margin"};
}

}  // namespace dab
