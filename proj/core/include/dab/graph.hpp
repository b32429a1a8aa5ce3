#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dab/tensor.hpp"

namespace dab {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
  Placeholder,
  Parameter,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Elu,
  Relu,
  Softplus,
  Exp,
  Log,
  Square,
  ClampMin,
  StopGradient,
  ReduceSum,    // axis -1 = all, 0 = over rows, 1 = over cols
  ReduceMean,
  LogSumExp,
  SliceCols,
};

const char* op_name(Op op);

// Placeholder inputs for one execution, keyed by placeholder name.
using Bindings = std::map<std::string, Tensor>;

// Static computation graph. Nodes are appended in construction order, which
// is therefore already topological: an op can only reference nodes that
// exist. Parameters live inside the graph and are mutated in place by the
// optimizers. A Graph is not safe for concurrent execution; give each
// thread its own Graph/Exec pair.
class Graph {
 public:
  // Leaves. Placeholder dims use -1 for "any size", typically the batch dim.
  NodeId placeholder(const std::string& name, std::vector<long long> dims);
  NodeId parameter(const std::string& name, Tensor init);
  NodeId constant(Tensor value);
  NodeId constant(double scalar);

  // Ops. Elementwise binary ops accept equal shapes, a scalar on either
  // side, or a rank-1 vector {n} against a matrix [B,n] (row broadcast).
  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId neg(NodeId a);
  NodeId elu(NodeId a);
  NodeId relu(NodeId a);
  NodeId softplus(NodeId a);
  NodeId exp(NodeId a);
  NodeId log(NodeId a);
  NodeId square(NodeId a);
  NodeId clamp_min(NodeId a, double floor);
  NodeId stop_gradient(NodeId a);
  NodeId reduce_sum(NodeId a, int axis = -1);
  NodeId reduce_mean(NodeId a, int axis = -1);
  NodeId logsumexp(NodeId a, int axis = -1);
  NodeId slice_cols(NodeId a, std::size_t begin, std::size_t end);

  // Named outputs, what forward(graph, inputs) returns.
  void mark_output(const std::string& name, NodeId id);
  NodeId output(const std::string& name) const;
  const std::map<std::string, NodeId>& outputs() const { return outputs_; }

  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;
  bool has_param(const std::string& name) const;
  NodeId param_node(const std::string& name) const;
  const std::vector<std::string>& param_names() const { return param_order_; }

  std::size_t node_count() const { return nodes_.size(); }
  const std::string& node_label(NodeId id) const;

 private:
  friend class Exec;

  struct Node {
    Op op;
    NodeId a = -1;
    NodeId b = -1;
    int axis = -1;
    std::size_t c0 = 0, c1 = 0;   // slice_cols range
    double attr = 0.0;            // clamp_min floor
    Tensor value;                 // Parameter/Constant payload
    std::vector<long long> decl;  // Placeholder declared dims, -1 = any
    std::string label;
  };

  NodeId push(Node n);
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  std::map<std::string, NodeId> placeholders_;
  std::map<std::string, NodeId> params_;
  std::vector<std::string> param_order_;
  std::map<std::string, NodeId> outputs_;
};

// One execution of a graph: forward pass, then optionally a backward pass
// over the values that forward produced. Reusable across calls; each
// forward resets the stored values.
class Exec {
 public:
  explicit Exec(Graph& g) : g_(&g) {}

  // Evaluates every node (default) or just the ancestors of `wanted`.
  void forward(const Bindings& inputs);
  void forward(const Bindings& inputs, const std::vector<NodeId>& wanted);

  const Tensor& value(NodeId id) const;

  // Reverse-mode pass from a scalar node. Returns one gradient tensor per
  // parameter, zeros for parameters with no path to the output.
  std::map<std::string, Tensor> backward(NodeId loss);

 private:
  void eval_node(NodeId id, const Bindings& inputs);

  Graph* g_;
  std::vector<Tensor> vals_;
  std::vector<char> have_;
};

// Convenience wrappers matching how callers usually want the engine:
// evaluate the graph's marked outputs, or get parameter gradients of one
// marked scalar output.
std::map<std::string, Tensor> forward(Graph& g, const Bindings& inputs);
std::map<std::string, Tensor> backward(Graph& g, const Bindings& inputs,
                                       const std::string& output_name);

}  // namespace dab
