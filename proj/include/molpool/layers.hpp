#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "molpool/checkpoint.hpp"
#include "molpool/graph.hpp"
#include "molpool/ops.hpp"
#include "molpool/tensor.hpp"

namespace molpool {

enum class PoolVariant { None, Simple, CoarseGrain };

const char* pool_variant_name(PoolVariant v);

struct ModelConfig {
  std::vector<long> node_channels;  // one entry per conv layer
  std::vector<long> edge_channels;
  double keep_ratio = 0.9;
  PoolVariant pooling = PoolVariant::None;
  long gather_width = 128;
  int mlp_depth = 2;  // affine layers inside each message network
  long task_count = 1;
  long node_in = 12;
  long edge_in = 4;
  unsigned long long seed = 0;

  void validate() const;  // throws std::invalid_argument naming the field
};

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

// affine -> ReLU -> ... -> affine, hidden width = output width
class Mlp {
 public:
  Mlp() = default;
  Mlp(long in, long out, int depth, std::mt19937_64& rng);

  Tensor forward(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;

  long in_width() const { return in_; }
  long out_width() const { return out_; }

 private:
  long in_ = 0, out_ = 0;
  std::vector<Tensor> weights_, biases_;
};

// Node update: m_i = sum_{j in N(i)} f(a_j || e_ij), both edge orientations;
// a'_i = ReLU(BN(m_i + W_s a_i + b_s)). Edge update: m_ij =
// g((a'_i + a'_j) || e_ij); e'_ij = ReLU(BN(m_ij + W_e e_ij + b_e)).
class DualMessageConv {
 public:
  DualMessageConv(long node_in, long edge_in, long node_out, long edge_out,
                  int mlp_depth, std::mt19937_64& rng);

  GraphBatch forward(const GraphBatch& batch);

  void set_training(bool on);
  void collect(const std::string& prefix, NamedTensors& params,
               NamedTensors* buffers);
  void sync_buffers(const std::string& prefix, const StateDict& state);

  long node_in() const { return f_net_.in_width() - edge_in_; }
  long node_out() const { return node_out_; }
  long edge_out() const { return edge_out_; }

 private:
  long edge_in_ = 0, node_out_ = 0, edge_out_ = 0;
  Mlp f_net_, g_net_;
  Tensor w_self_node_, b_self_node_, w_self_edge_, b_self_edge_;
  BatchNormState bn_node_, bn_edge_;
};

// Node selection and rewiring recorded for one pooling layer.
struct PoolTrace {
  struct PerGraph {
    std::vector<long> kept;      // graph-local original node ids, ascending
    std::vector<double> scores;  // per original node
    PoolPlan plan;
  };
  std::vector<PerGraph> graphs;
};

class TopKPool {
 public:
  TopKPool(long node_width, long edge_width, double rho, PoolVariant variant,
           int mlp_depth, std::mt19937_64& rng);

  GraphBatch forward(const GraphBatch& batch, PoolTrace* trace = nullptr);

  // y_i = p . a_i and a_i * tanh(y_i); the gate keeps selection
  // differentiable in the projection vector.
  std::pair<Tensor, Tensor> score_and_gate(const Tensor& node_feats) const;

  void collect(const std::string& prefix, NamedTensors& params) const;

 private:
  long node_width_ = 0, edge_width_ = 0;
  double rho_ = 1.0;
  PoolVariant variant_ = PoolVariant::Simple;
  Tensor proj_;  // {node_width, 1}
  Mlp path_net_, kept_net_;  // CoarseGrain only
};

// Per-node linear, then per graph tanh(max || sum).
class GatherHead {
 public:
  GatherHead(long node_width, long gather_width, std::mt19937_64& rng);

  Tensor forward(const GraphBatch& batch) const;
  void collect(const std::string& prefix, NamedTensors& out) const;

 private:
  Tensor w_, b_;
};

class Model {
 public:
  explicit Model(ModelConfig cfg);

  // predictions [graph_count x task_count]; traces (when given) receive one
  // entry per pooling layer
  Tensor forward(const GraphBatch& batch,
                 std::vector<PoolTrace>* traces = nullptr);

  void set_training(bool on);
  bool training() const { return training_; }

  NamedTensors parameters();
  StateDict state_dict();
  void load_state(const StateDict& state);

  const ModelConfig& config() const { return cfg_; }
  int pool_layer_count() const { return static_cast<int>(pools_.size()); }

 private:
  ModelConfig cfg_;
  std::vector<DualMessageConv> convs_;
  std::vector<TopKPool> pools_;
  std::optional<GatherHead> gather_;
  Tensor w_out_, b_out_;
  bool training_ = true;
};

}  // namespace molpool
