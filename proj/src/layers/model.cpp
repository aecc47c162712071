#include <stdexcept>

#include "init.hpp"
#include "molpool/layers.hpp"

namespace molpool {

const char* pool_variant_name(PoolVariant v) {
  switch (v) {
    case PoolVariant::None: return "none";
    case PoolVariant::Simple: return "simple";
    case PoolVariant::CoarseGrain: return "coarse_grain";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (node_channels.empty())
    throw std::invalid_argument("model.node_channels: at least one conv layer required");
  if (node_channels.size() != edge_channels.size())
    throw std::invalid_argument(
        "model.edge_channels: length must match node_channels (" +
        std::to_string(node_channels.size()) + ")");
  for (long c : node_channels)
    if (c < 1) throw std::invalid_argument("model.node_channels: widths must be positive");
  for (long c : edge_channels)
    if (c < 1) throw std::invalid_argument("model.edge_channels: widths must be positive");
  if (!(keep_ratio > 0.0) || keep_ratio > 1.0)
    throw std::invalid_argument("model.keep_ratio: must lie in (0, 1], got " +
                                std::to_string(keep_ratio));
  if (gather_width < 1)
    throw std::invalid_argument("model.gather_width: must be positive");
  if (mlp_depth < 1)
    throw std::invalid_argument("model.mlp_depth: must be >= 1");
  if (task_count < 1)
    throw std::invalid_argument("model.task_count: must be >= 1");
  if (node_in < 1 || edge_in < 1)
    throw std::invalid_argument("model.node_in/edge_in: must be positive");
}

GatherHead::GatherHead(long node_width, long gather_width,
                       std::mt19937_64& rng)
    : w_(detail::init_weight(node_width, gather_width, rng)),
      b_(detail::init_bias(node_width, gather_width, rng)) {}

Tensor GatherHead::forward(const GraphBatch& batch) const {
  Tensor h = affine(batch.node_feats, w_, b_);
  Tensor mx = segment_reduce(h, batch.node_graph_id, SegmentMode::Max,
                             batch.graph_count);
  Tensor sm = segment_reduce(h, batch.node_graph_id, SegmentMode::Sum,
                             batch.graph_count);
  return tanh(concat({mx, sm}, 1));
}

void GatherHead::collect(const std::string& prefix, NamedTensors& out) const {
  out.push_back({prefix + ".w", w_});
  out.push_back({prefix + ".b", b_});
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  const int n_layers = static_cast<int>(cfg_.node_channels.size());

  long node_w = cfg_.node_in, edge_w = cfg_.edge_in;
  for (int k = 0; k < n_layers; ++k) {
    convs_.emplace_back(node_w, edge_w, cfg_.node_channels[k],
                        cfg_.edge_channels[k], cfg_.mlp_depth, rng);
    node_w = cfg_.node_channels[k];
    edge_w = cfg_.edge_channels[k];
    // pooling after every conv except the final one
    if (cfg_.pooling != PoolVariant::None && k + 1 < n_layers)
      pools_.emplace_back(node_w, edge_w, cfg_.keep_ratio, cfg_.pooling,
                          cfg_.mlp_depth, rng);
  }
  gather_.emplace(node_w, cfg_.gather_width, rng);
  w_out_ = detail::init_weight(2 * cfg_.gather_width, cfg_.task_count, rng);
  b_out_ = detail::init_bias(2 * cfg_.gather_width, cfg_.task_count, rng);
}

Tensor Model::forward(const GraphBatch& batch,
                      std::vector<PoolTrace>* traces) {
  if (traces) traces->assign(pools_.size(), {});
  GraphBatch cur = batch;
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    cur = convs_[k].forward(cur);
    if (cfg_.pooling != PoolVariant::None && k < pools_.size())
      cur = pools_[k].forward(cur, traces ? &(*traces)[k] : nullptr);
  }
  Tensor pooled = gather_->forward(cur);
  return affine(pooled, w_out_, b_out_);
}

void Model::set_training(bool on) {
  training_ = on;
  for (auto& conv : convs_) conv.set_training(on);
}

NamedTensors Model::parameters() {
  NamedTensors params;
  for (std::size_t k = 0; k < convs_.size(); ++k)
    convs_[k].collect("conv" + std::to_string(k), params, nullptr);
  for (std::size_t k = 0; k < pools_.size(); ++k)
    pools_[k].collect("pool" + std::to_string(k), params);
  gather_->collect("gather", params);
  params.push_back({"out.w", w_out_});
  params.push_back({"out.b", b_out_});
  return params;
}

StateDict Model::state_dict() {
  NamedTensors params, buffers;
  for (std::size_t k = 0; k < convs_.size(); ++k)
    convs_[k].collect("conv" + std::to_string(k), params, &buffers);
  for (std::size_t k = 0; k < pools_.size(); ++k)
    pools_[k].collect("pool" + std::to_string(k), params);
  gather_->collect("gather", params);
  params.push_back({"out.w", w_out_});
  params.push_back({"out.b", b_out_});

  StateDict state;
  for (const auto& [name, t] : params) state[name] = {t.shape(), t.values()};
  for (const auto& [name, t] : buffers) state[name] = {t.shape(), t.values()};
  return state;
}

void Model::load_state(const StateDict& state) {
  NamedTensors params = parameters();
  std::size_t consumed = 0;
  for (auto& [name, tensor] : params) {
    auto it = state.find(name);
    if (it == state.end())
      throw std::runtime_error("checkpoint: missing entry " + name);
    if (it->second.shape != tensor.shape())
      throw std::runtime_error(
          "checkpoint: entry " + name + " has shape " +
          Tensor::zeros(it->second.shape).shape_str() + ", model expects " +
          tensor.shape_str());
    tensor.values() = it->second.values;
    ++consumed;
  }
  for (std::size_t k = 0; k < convs_.size(); ++k) {
    convs_[k].sync_buffers("conv" + std::to_string(k), state);
    consumed += 4;
  }
  if (consumed != state.size())
    throw std::runtime_error(
        "checkpoint: " + std::to_string(state.size() - consumed) +
        " entries do not belong to this model configuration");
}

}  // namespace molpool
