#include "dab/graph.hpp"

#include <algorithm>
#include <cmath>

#include "dab/errors.hpp"

namespace dab {

const char* op_name(Op op) {
  switch (op) {
    case Op::Placeholder: return "placeholder";
    case Op::Parameter: return "parameter";
    case Op::Constant: return "constant";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Div: return "div";
    case Op::Neg: return "neg";
    case Op::Elu: return "elu";
    case Op::Relu: return "relu";
    case Op::Softplus: return "softplus";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Square: return "square";
    case Op::ClampMin: return "clamp_min";
    case Op::StopGradient: return "stop_gradient";
    case Op::ReduceSum: return "reduce_sum";
    case Op::ReduceMean: return "reduce_mean";
    case Op::LogSumExp: return "logsumexp";
    case Op::SliceCols: return "slice_cols";
  }
  return "?";
}

NodeId Graph::push(Node n) {
  if (n.label.empty()) {
    n.label = std::string(op_name(n.op)) + "#" + std::to_string(nodes_.size());
  }
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Graph::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw Error("node id " + std::to_string(id) + " out of range");
  }
}

NodeId Graph::placeholder(const std::string& name, std::vector<long long> dims) {
  if (placeholders_.count(name) || params_.count(name)) {
    throw Error("duplicate leaf name '" + name + "'");
  }
  Node n;
  n.op = Op::Placeholder;
  n.decl = std::move(dims);
  n.label = name;
  NodeId id = push(std::move(n));
  placeholders_[name] = id;
  return id;
}

NodeId Graph::parameter(const std::string& name, Tensor init) {
  if (placeholders_.count(name) || params_.count(name)) {
    throw Error("duplicate leaf name '" + name + "'");
  }
  if (!init.all_finite()) {
    throw NumericError("parameter '" + name + "' initialized with non-finite values");
  }
  Node n;
  n.op = Op::Parameter;
  n.value = std::move(init);
  n.label = name;
  NodeId id = push(std::move(n));
  params_[name] = id;
  param_order_.push_back(name);
  return id;
}

NodeId Graph::constant(Tensor value) {
  if (!value.all_finite()) throw NumericError("constant with non-finite values");
  Node n;
  n.op = Op::Constant;
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Graph::constant(double scalar) { return constant(Tensor::scalar(scalar)); }

NodeId Graph::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

#define DAB_BINARY(fn, opk)                  \
  NodeId Graph::fn(NodeId a, NodeId b) {     \
    check_id(a);                             \
    check_id(b);                             \
    Node n;                                  \
    n.op = opk;                              \
    n.a = a;                                 \
    n.b = b;                                 \
    return push(std::move(n));               \
  }

DAB_BINARY(add, Op::Add)
DAB_BINARY(sub, Op::Sub)
DAB_BINARY(mul, Op::Mul)
DAB_BINARY(div, Op::Div)
#undef DAB_BINARY

#define DAB_UNARY(fn, opk)              \
  NodeId Graph::fn(NodeId a) {          \
    check_id(a);                        \
    Node n;                             \
    n.op = opk;                         \
    n.a = a;                            \
    return push(std::move(n));          \
  }

DAB_UNARY(neg, Op::Neg)
DAB_UNARY(elu, Op::Elu)
DAB_UNARY(relu, Op::Relu)
DAB_UNARY(softplus, Op::Softplus)
DAB_UNARY(exp, Op::Exp)
DAB_UNARY(log, Op::Log)
DAB_UNARY(square, Op::Square)
DAB_UNARY(stop_gradient, Op::StopGradient)
#undef DAB_UNARY

NodeId Graph::clamp_min(NodeId a, double floor) {
  check_id(a);
  Node n;
  n.op = Op::ClampMin;
  n.a = a;
  n.attr = floor;
  return push(std::move(n));
}

static void check_axis(int axis) {
  if (axis < -1 || axis > 1) {
    throw Error("reduction axis must be -1 (all), 0 or 1, got " + std::to_string(axis));
  }
}

NodeId Graph::reduce_sum(NodeId a, int axis) {
  check_id(a);
  check_axis(axis);
  Node n;
  n.op = Op::ReduceSum;
  n.a = a;
  n.axis = axis;
  return push(std::move(n));
}

NodeId Graph::reduce_mean(NodeId a, int axis) {
  check_id(a);
  check_axis(axis);
  Node n;
  n.op = Op::ReduceMean;
  n.a = a;
  n.axis = axis;
  return push(std::move(n));
}

NodeId Graph::logsumexp(NodeId a, int axis) {
  check_id(a);
  check_axis(axis);
  Node n;
  n.op = Op::LogSumExp;
  n.a = a;
  n.axis = axis;
  return push(std::move(n));
}

NodeId Graph::slice_cols(NodeId a, std::size_t begin, std::size_t end) {
  check_id(a);
  if (end <= begin) throw Error("slice_cols: empty or inverted range");
  Node n;
  n.op = Op::SliceCols;
  n.a = a;
  n.c0 = begin;
  n.c1 = end;
  return push(std::move(n));
}

void Graph::mark_output(const std::string& name, NodeId id) {
  check_id(id);
  outputs_[name] = id;
}

NodeId Graph::output(const std::string& name) const {
  auto it = outputs_.find(name);
  if (it == outputs_.end()) throw Error("no output named '" + name + "'");
  return it->second;
}

Tensor& Graph::param(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("no parameter named '" + name + "'");
  return nodes_[it->second].value;
}

const Tensor& Graph::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("no parameter named '" + name + "'");
  return nodes_[it->second].value;
}

bool Graph::has_param(const std::string& name) const { return params_.count(name) > 0; }

NodeId Graph::param_node(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("no parameter named '" + name + "'");
  return it->second;
}

const std::string& Graph::node_label(NodeId id) const {
  check_id(id);
  return nodes_[id].label;
}

// ---------------------------------------------------------------------------
// Execution

namespace {

// Broadcast category for elementwise binary ops.
enum class Bcast { Same, ScalarRight, ScalarLeft, RowRight, RowLeft };

Bcast classify(const Tensor& a, const Tensor& b, const std::string& label) {
  if (a.shape == b.shape) return Bcast::Same;
  if (b.size() == 1) return Bcast::ScalarRight;
  if (a.size() == 1) return Bcast::ScalarLeft;
  if (a.rank() == 2 && b.rank() == 1 && b.shape[0] == a.shape[1]) return Bcast::RowRight;
  if (b.rank() == 2 && a.rank() == 1 && a.shape[0] == b.shape[1]) return Bcast::RowLeft;
  throw ShapeError("elementwise op '" + label + "': incompatible shapes " +
                   shape_str(a.shape) + " vs " + shape_str(b.shape));
}

// Sums an adjoint of `full` shape down to the operand's shape, inverting a
// broadcast. Used by binary-op backward.
Tensor reduce_to_shape(const Tensor& adj, const std::vector<std::size_t>& target) {
  if (adj.shape == target) return adj;
  Tensor out = Tensor::zeros(target);
  if (out.size() == 1) {
    double s = 0.0;
    for (double v : adj.data) s += v;
    out.data[0] = s;
    return out;
  }
  // Row-broadcast case: adj is [B,n], target is {n}.
  if (adj.rank() == 2 && target.size() == 1 && target[0] == adj.shape[1]) {
    const std::size_t rows = adj.shape[0], cols = adj.shape[1];
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) out.data[c] += adj.data[r * cols + c];
    return out;
  }
  throw ShapeError("cannot reduce adjoint " + shape_str(adj.shape) + " to " +
                   shape_str(target));
}

double stable_softplus(double x) {
  // softplus(x) = log(1+e^x), written to avoid overflow for large |x|.
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double t = std::exp(-x);
    return 1.0 / (1.0 + t);
  }
  const double t = std::exp(x);
  return t / (1.0 + t);
}

}  // namespace

void Exec::forward(const Bindings& inputs) {
  std::vector<NodeId> all(g_->nodes_.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<NodeId>(i);
  forward(inputs, all);
}

void Exec::forward(const Bindings& inputs, const std::vector<NodeId>& wanted) {
  const std::size_t n = g_->nodes_.size();
  vals_.assign(n, Tensor());
  have_.assign(n, 0);

  for (const auto& [name, t] : inputs) {
    if (!g_->placeholders_.count(name)) {
      throw Error("binding for unknown placeholder '" + name + "'");
    }
    if (!t.all_finite()) {
      throw NumericError("binding for placeholder '" + name + "' contains non-finite values");
    }
  }

  // Mark ancestors of the wanted set, then evaluate in index order (which
  // is topological by construction).
  std::vector<char> need(n, 0);
  std::vector<NodeId> stack(wanted);
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    g_->check_id(id);
    if (need[id]) continue;
    need[id] = 1;
    const auto& node = g_->nodes_[id];
    if (node.a >= 0) stack.push_back(node.a);
    if (node.b >= 0) stack.push_back(node.b);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (need[i]) eval_node(static_cast<NodeId>(i), inputs);
  }
}

const Tensor& Exec::value(NodeId id) const {
  g_->check_id(id);
  if (!have_[id]) throw Error("node '" + g_->nodes_[id].label + "' was not evaluated");
  return vals_[id];
}

void Exec::eval_node(NodeId id, const Bindings& inputs) {
  const auto& node = g_->nodes_[id];
  Tensor out;

  auto in = [&](NodeId i) -> const Tensor& { return vals_[i]; };

  switch (node.op) {
    case Op::Placeholder: {
      auto it = inputs.find(node.label);
      if (it == inputs.end()) {
        throw Error("placeholder '" + node.label + "' has no binding");
      }
      const Tensor& t = it->second;
      if (t.rank() != node.decl.size()) {
        throw ShapeError("placeholder '" + node.label + "': bound rank " +
                         std::to_string(t.rank()) + ", declared rank " +
                         std::to_string(node.decl.size()));
      }
      for (std::size_t d = 0; d < node.decl.size(); ++d) {
        if (node.decl[d] >= 0 && static_cast<long long>(t.shape[d]) != node.decl[d]) {
          throw ShapeError("placeholder '" + node.label + "': bound shape " +
                           shape_str(t.shape) + " violates declared dim " +
                           std::to_string(d));
        }
      }
      out = t;
      break;
    }
    case Op::Parameter:
    case Op::Constant:
      out = node.value;
      break;

    case Op::MatMul: {
      const Tensor& a = in(node.a);
      const Tensor& b = in(node.b);
      if (a.rank() != 2 || b.rank() != 2 || a.shape[1] != b.shape[0]) {
        throw ShapeError("matmul '" + node.label + "': " + shape_str(a.shape) +
                         " x " + shape_str(b.shape));
      }
      const std::size_t R = a.shape[0], K = a.shape[1], C = b.shape[1];
      out = Tensor::zeros({R, C});
      for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t k = 0; k < K; ++k) {
          const double av = a.data[r * K + k];
          if (av == 0.0) continue;
          const double* brow = &b.data[k * C];
          double* orow = &out.data[r * C];
          for (std::size_t c = 0; c < C; ++c) orow[c] += av * brow[c];
        }
      }
      break;
    }

    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const Tensor& a = in(node.a);
      const Tensor& b = in(node.b);
      const Bcast bc = classify(a, b, node.label);
      const Tensor& big = (bc == Bcast::ScalarLeft || bc == Bcast::RowLeft) ? b : a;
      out = Tensor::zeros(big.shape);
      const std::size_t cols = big.rank() == 2 ? big.shape[1] : big.size();
      for (std::size_t i = 0; i < big.size(); ++i) {
        double x, y;
        switch (bc) {
          case Bcast::Same: x = a.data[i]; y = b.data[i]; break;
          case Bcast::ScalarRight: x = a.data[i]; y = b.data[0]; break;
          case Bcast::ScalarLeft: x = a.data[0]; y = b.data[i]; break;
          case Bcast::RowRight: x = a.data[i]; y = b.data[i % cols]; break;
          case Bcast::RowLeft: x = a.data[i % cols]; y = b.data[i]; break;
          default: x = y = 0.0; break;
        }
        double v = 0.0;
        switch (node.op) {
          case Op::Add: v = x + y; break;
          case Op::Sub: v = x - y; break;
          case Op::Mul: v = x * y; break;
          case Op::Div: v = x / y; break;
          default: break;
        }
        out.data[i] = v;
      }
      break;
    }

    case Op::Neg: {
      out = in(node.a);
      for (double& v : out.data) v = -v;
      break;
    }
    case Op::Elu: {
      out = in(node.a);
      for (double& v : out.data) v = v > 0.0 ? v : std::expm1(v);
      break;
    }
    case Op::Relu: {
      out = in(node.a);
      for (double& v : out.data) v = v > 0.0 ? v : 0.0;
      break;
    }
    case Op::Softplus: {
      out = in(node.a);
      for (double& v : out.data) v = stable_softplus(v);
      break;
    }
    case Op::Exp: {
      out = in(node.a);
      for (double& v : out.data) v = std::exp(v);
      break;
    }
    case Op::Log: {
      out = in(node.a);
      for (double& v : out.data) {
        if (v <= 0.0) {
          throw NumericError("log at node '" + node.label + "': nonpositive input " +
                             std::to_string(v));
        }
        v = std::log(v);
      }
      break;
    }
    case Op::Square: {
      out = in(node.a);
      for (double& v : out.data) v = v * v;
      break;
    }
    case Op::ClampMin: {
      out = in(node.a);
      for (double& v : out.data) v = v > node.attr ? v : node.attr;
      break;
    }
    case Op::StopGradient:
      out = in(node.a);
      break;

    case Op::ReduceSum:
    case Op::ReduceMean: {
      const Tensor& a = in(node.a);
      const bool mean = node.op == Op::ReduceMean;
      if (node.axis == -1) {
        double s = 0.0;
        for (double v : a.data) s += v;
        if (mean) s /= static_cast<double>(a.size());
        out = Tensor::scalar(s);
      } else {
        if (a.rank() != 2) {
          throw ShapeError("axis reduction at '" + node.label + "' needs a matrix, got " +
                           shape_str(a.shape));
        }
        const std::size_t R = a.shape[0], C = a.shape[1];
        if (node.axis == 0) {
          out = Tensor::zeros({C});
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c) out.data[c] += a.data[r * C + c];
          if (mean)
            for (double& v : out.data) v /= static_cast<double>(R);
        } else {
          out = Tensor::zeros({R});
          for (std::size_t r = 0; r < R; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < C; ++c) s += a.data[r * C + c];
            out.data[r] = mean ? s / static_cast<double>(C) : s;
          }
        }
      }
      break;
    }

    case Op::LogSumExp: {
      const Tensor& a = in(node.a);
      auto lse = [](const double* p, std::size_t n, std::size_t stride) {
        double m = p[0];
        for (std::size_t i = 1; i < n; ++i) m = std::max(m, p[i * stride]);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += std::exp(p[i * stride] - m);
        return m + std::log(s);
      };
      if (node.axis == -1) {
        out = Tensor::scalar(lse(a.data.data(), a.size(), 1));
      } else {
        if (a.rank() != 2) {
          throw ShapeError("axis logsumexp at '" + node.label + "' needs a matrix, got " +
                           shape_str(a.shape));
        }
        const std::size_t R = a.shape[0], C = a.shape[1];
        if (node.axis == 1) {
          out = Tensor::zeros({R});
          for (std::size_t r = 0; r < R; ++r) out.data[r] = lse(&a.data[r * C], C, 1);
        } else {
          out = Tensor::zeros({C});
          for (std::size_t c = 0; c < C; ++c) out.data[c] = lse(&a.data[c], R, C);
        }
      }
      break;
    }

    case Op::SliceCols: {
      const Tensor& a = in(node.a);
      if (a.rank() != 2 || node.c1 > a.shape[1]) {
        throw ShapeError("slice_cols at '" + node.label + "': range [" +
                         std::to_string(node.c0) + "," + std::to_string(node.c1) +
                         ") on " + shape_str(a.shape));
      }
      const std::size_t R = a.shape[0], C = a.shape[1], W = node.c1 - node.c0;
      out = Tensor::zeros({R, W});
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < W; ++c)
          out.data[r * W + c] = a.data[r * C + node.c0 + c];
      break;
    }
  }

  if (!out.all_finite()) {
    throw NumericError("non-finite value produced at node '" + node.label + "' (" +
                       op_name(node.op) + ")");
  }
  vals_[id] = std::move(out);
  have_[id] = 1;
}

std::map<std::string, Tensor> Exec::backward(NodeId loss) {
  g_->check_id(loss);
  if (!have_[loss]) throw Error("backward: node was not evaluated in the last forward");
  if (vals_[loss].size() != 1) {
    throw Error("backward: output '" + g_->nodes_[loss].label + "' is not scalar, shape " +
                shape_str(vals_[loss].shape));
  }

  const std::size_t n = g_->nodes_.size();
  std::vector<Tensor> adj(n);
  std::vector<char> has_adj(n, 0);
  auto seed_or_add = [&](NodeId id, const Tensor& g) {
    if (!has_adj[id]) {
      adj[id] = g;
      has_adj[id] = 1;
    } else {
      for (std::size_t i = 0; i < g.data.size(); ++i) adj[id].data[i] += g.data[i];
    }
  };

  adj[loss] = vals_[loss];
  adj[loss].data[0] = 1.0;
  has_adj[loss] = 1;

  for (NodeId id = loss; id >= 0; --id) {
    if (!has_adj[id] || !have_[id]) continue;
    const auto& node = g_->nodes_[id];
    const Tensor& g = adj[id];
    if (!g.all_finite()) {
      throw NumericError("non-finite gradient at node '" + node.label + "'");
    }

    switch (node.op) {
      case Op::Placeholder:
      case Op::Parameter:
      case Op::Constant:
      case Op::StopGradient:
        break;  // leaves; stop_gradient blocks on purpose

      case Op::MatMul: {
        const Tensor& a = vals_[node.a];
        const Tensor& b = vals_[node.b];
        const std::size_t R = a.shape[0], K = a.shape[1], C = b.shape[1];
        Tensor da = Tensor::zeros(a.shape);
        Tensor db = Tensor::zeros(b.shape);
        for (std::size_t r = 0; r < R; ++r) {
          for (std::size_t c = 0; c < C; ++c) {
            const double gv = g.data[r * C + c];
            if (gv == 0.0) continue;
            for (std::size_t k = 0; k < K; ++k) {
              da.data[r * K + k] += gv * b.data[k * C + c];
              db.data[k * C + c] += gv * a.data[r * K + k];
            }
          }
        }
        seed_or_add(node.a, da);
        seed_or_add(node.b, db);
        break;
      }

      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div: {
        const Tensor& a = vals_[node.a];
        const Tensor& b = vals_[node.b];
        const Bcast bc = classify(a, b, node.label);
        const Tensor& big = (bc == Bcast::ScalarLeft || bc == Bcast::RowLeft) ? b : a;
        const std::size_t cols = big.rank() == 2 ? big.shape[1] : big.size();
        Tensor da_full = Tensor::zeros(big.shape);
        Tensor db_full = Tensor::zeros(big.shape);
        for (std::size_t i = 0; i < big.size(); ++i) {
          double x, y;
          switch (bc) {
            case Bcast::Same: x = a.data[i]; y = b.data[i]; break;
            case Bcast::ScalarRight: x = a.data[i]; y = b.data[0]; break;
            case Bcast::ScalarLeft: x = a.data[0]; y = b.data[i]; break;
            case Bcast::RowRight: x = a.data[i]; y = b.data[i % cols]; break;
            case Bcast::RowLeft: x = a.data[i % cols]; y = b.data[i]; break;
            default: x = y = 0.0; break;
          }
          const double gv = g.data[i];
          switch (node.op) {
            case Op::Add:
              da_full.data[i] = gv;
              db_full.data[i] = gv;
              break;
            case Op::Sub:
              da_full.data[i] = gv;
              db_full.data[i] = -gv;
              break;
            case Op::Mul:
              da_full.data[i] = gv * y;
              db_full.data[i] = gv * x;
              break;
            case Op::Div:
              da_full.data[i] = gv / y;
              db_full.data[i] = -gv * x / (y * y);
              break;
            default: break;
          }
        }
        seed_or_add(node.a, reduce_to_shape(da_full, a.shape));
        seed_or_add(node.b, reduce_to_shape(db_full, b.shape));
        break;
      }

      case Op::Neg: {
        Tensor da = g;
        for (double& v : da.data) v = -v;
        seed_or_add(node.a, da);
        break;
      }
      case Op::Elu: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
          da.data[i] *= x.data[i] > 0.0 ? 1.0 : std::exp(x.data[i]);
        }
        seed_or_add(node.a, da);
        break;
      }
      case Op::Relu: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
          if (x.data[i] <= 0.0) da.data[i] = 0.0;
        }
        seed_or_add(node.a, da);
        break;
      }
      case Op::Softplus: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= sigmoid(x.data[i]);
        seed_or_add(node.a, da);
        break;
      }
      case Op::Exp: {
        const Tensor& y = vals_[id];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= y.data[i];
        seed_or_add(node.a, da);
        break;
      }
      case Op::Log: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] /= x.data[i];
        seed_or_add(node.a, da);
        break;
      }
      case Op::Square: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) da.data[i] *= 2.0 * x.data[i];
        seed_or_add(node.a, da);
        break;
      }
      case Op::ClampMin: {
        const Tensor& x = vals_[node.a];
        Tensor da = g;
        for (std::size_t i = 0; i < da.data.size(); ++i) {
          if (x.data[i] <= node.attr) da.data[i] = 0.0;
        }
        seed_or_add(node.a, da);
        break;
      }

      case Op::ReduceSum:
      case Op::ReduceMean: {
        const Tensor& x = vals_[node.a];
        Tensor da = Tensor::zeros(x.shape);
        if (node.axis == -1) {
          double gv = g.data[0];
          if (node.op == Op::ReduceMean) gv /= static_cast<double>(x.size());
          for (double& v : da.data) v = gv;
        } else {
          const std::size_t R = x.shape[0], C = x.shape[1];
          if (node.axis == 0) {
            for (std::size_t r = 0; r < R; ++r)
              for (std::size_t c = 0; c < C; ++c) {
                double gv = g.data[c];
                if (node.op == Op::ReduceMean) gv /= static_cast<double>(R);
                da.data[r * C + c] = gv;
              }
          } else {
            for (std::size_t r = 0; r < R; ++r)
              for (std::size_t c = 0; c < C; ++c) {
                double gv = g.data[r];
                if (node.op == Op::ReduceMean) gv /= static_cast<double>(C);
                da.data[r * C + c] = gv;
              }
          }
        }
        seed_or_add(node.a, da);
        break;
      }

      case Op::LogSumExp: {
        const Tensor& x = vals_[node.a];
        const Tensor& y = vals_[id];
        Tensor da = Tensor::zeros(x.shape);
        if (node.axis == -1) {
          for (std::size_t i = 0; i < x.size(); ++i)
            da.data[i] = g.data[0] * std::exp(x.data[i] - y.data[0]);
        } else {
          const std::size_t R = x.shape[0], C = x.shape[1];
          for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c) {
              const std::size_t k = node.axis == 1 ? r : c;
              da.data[r * C + c] = g.data[k] * std::exp(x.data[r * C + c] - y.data[k]);
            }
        }
        seed_or_add(node.a, da);
        break;
      }

      case Op::SliceCols: {
        const Tensor& x = vals_[node.a];
        const std::size_t R = x.shape[0], C = x.shape[1], W = node.c1 - node.c0;
        Tensor da = Tensor::zeros(x.shape);
        for (std::size_t r = 0; r < R; ++r)
          for (std::size_t c = 0; c < W; ++c)
            da.data[r * C + node.c0 + c] = g.data[r * W + c];
        seed_or_add(node.a, da);
        break;
      }
    }
  }

  std::map<std::string, Tensor> grads;
  for (const auto& name : g_->param_order_) {
    NodeId pid = g_->params_.at(name);
    if (has_adj[pid]) {
      grads[name] = adj[pid];
    } else {
      grads[name] = Tensor::zeros(g_->nodes_[pid].value.shape);
    }
  }
  return grads;
}

std::map<std::string, Tensor> forward(Graph& g, const Bindings& inputs) {
  std::vector<NodeId> wanted;
  for (const auto& [name, id] : g.outputs()) wanted.push_back(id);
  Exec ex(g);
  ex.forward(inputs, wanted);
  std::map<std::string, Tensor> out;
  for (const auto& [name, id] : g.outputs()) out[name] = ex.value(id);
  return out;
}

std::map<std::string, Tensor> backward(Graph& g, const Bindings& inputs,
                                       const std::string& output_name) {
  Exec ex(g);
  NodeId id = g.output(output_name);
  ex.forward(inputs, {id});
  return ex.backward(id);
}

}  // namespace dab
