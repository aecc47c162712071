#include <stdexcept>

#include "init.hpp"
#include "molpool/layers.hpp"

namespace molpool {

DualMessageConv::DualMessageConv(long node_in, long edge_in, long node_out,
                                 long edge_out, int mlp_depth,
                                 std::mt19937_64& rng)
    : edge_in_(edge_in),
      node_out_(node_out),
      edge_out_(edge_out),
      f_net_(node_in + edge_in, node_out, mlp_depth, rng),
      g_net_(node_out + edge_in, edge_out, mlp_depth, rng),
      w_self_node_(detail::init_weight(node_in, node_out, rng)),
      b_self_node_(detail::init_bias(node_in, node_out, rng)),
      w_self_edge_(detail::init_weight(edge_in, edge_out, rng)),
      b_self_edge_(detail::init_bias(edge_in, edge_out, rng)),
      bn_node_(node_out),
      bn_edge_(edge_out) {}

GraphBatch DualMessageConv::forward(const GraphBatch& batch) {
  if (batch.node_feats.cols() != w_self_node_.rows())
    throw std::invalid_argument("conv: node width " +
                                batch.node_feats.shape_str() +
                                " does not match layer input " +
                                w_self_node_.shape_str());
  if (batch.edge_feats.cols() != edge_in_)
    throw std::invalid_argument("conv: edge width " +
                                batch.edge_feats.shape_str() +
                                " does not match layer input width " +
                                std::to_string(edge_in_));

  const long n = batch.num_nodes();
  const long m = batch.num_edges();

  // both orientations of each stored undirected edge
  std::vector<long> src(2 * m), edge_row(2 * m);
  std::vector<int> dst(2 * m);
  for (long e = 0; e < m; ++e) {
    src[e] = batch.edges[e][1];
    dst[e] = static_cast<int>(batch.edges[e][0]);
    src[m + e] = batch.edges[e][0];
    dst[m + e] = static_cast<int>(batch.edges[e][1]);
    edge_row[e] = e;
    edge_row[m + e] = e;
  }

  Tensor msg_in = concat({row_gather(batch.node_feats, src),
                          row_gather(batch.edge_feats, edge_row)},
                         1);
  Tensor summed = segment_reduce(f_net_.forward(msg_in), dst,
                                 SegmentMode::Sum, n);
  Tensor self_msg = affine(batch.node_feats, w_self_node_, b_self_node_);
  Tensor new_nodes = relu(batchnorm(add(summed, self_msg), bn_node_));

  Tensor new_edges;
  if (m == 0) {
    new_edges = Tensor::zeros({0, edge_out_});
  } else {
    std::vector<long> ei(m), ej(m);
    for (long e = 0; e < m; ++e) {
      ei[e] = batch.edges[e][0];
      ej[e] = batch.edges[e][1];
    }
    Tensor endpoint_sum =
        add(row_gather(new_nodes, ei), row_gather(new_nodes, ej));
    Tensor edge_msg =
        g_net_.forward(concat({endpoint_sum, batch.edge_feats}, 1));
    Tensor edge_self = affine(batch.edge_feats, w_self_edge_, b_self_edge_);
    new_edges = relu(batchnorm(add(edge_msg, edge_self), bn_edge_));
  }

  GraphBatch out = batch;
  out.node_feats = new_nodes;
  out.edge_feats = new_edges;
  return out;
}

void DualMessageConv::set_training(bool on) {
  bn_node_.training = on;
  bn_edge_.training = on;
}

void DualMessageConv::collect(const std::string& prefix, NamedTensors& params,
                              NamedTensors* buffers) {
  f_net_.collect(prefix + ".f_net", params);
  g_net_.collect(prefix + ".g_net", params);
  params.push_back({prefix + ".self_node.w", w_self_node_});
  params.push_back({prefix + ".self_node.b", b_self_node_});
  params.push_back({prefix + ".self_edge.w", w_self_edge_});
  params.push_back({prefix + ".self_edge.b", b_self_edge_});
  params.push_back({prefix + ".bn_node.gamma", bn_node_.gamma});
  params.push_back({prefix + ".bn_node.beta", bn_node_.beta});
  params.push_back({prefix + ".bn_edge.gamma", bn_edge_.gamma});
  params.push_back({prefix + ".bn_edge.beta", bn_edge_.beta});
  if (buffers) {
    auto as_tensor = [](const std::vector<double>& v) {
      return Tensor::from(v, {static_cast<long>(v.size())});
    };
    buffers->push_back(
        {prefix + ".bn_node.running_mean", as_tensor(bn_node_.running_mean)});
    buffers->push_back(
        {prefix + ".bn_node.running_var", as_tensor(bn_node_.running_var)});
    buffers->push_back(
        {prefix + ".bn_edge.running_mean", as_tensor(bn_edge_.running_mean)});
    buffers->push_back(
        {prefix + ".bn_edge.running_var", as_tensor(bn_edge_.running_var)});
  }
}

void DualMessageConv::sync_buffers(const std::string& prefix,
                                   const StateDict& state) {
  auto fetch = [&](const std::string& name, std::vector<double>& dst) {
    auto it = state.find(name);
    if (it == state.end())
      throw std::runtime_error("checkpoint: missing entry " + name);
    if (it->second.values.size() != dst.size())
      throw std::runtime_error("checkpoint: entry " + name + " has " +
                               std::to_string(it->second.values.size()) +
                               " values, model expects " +
                               std::to_string(dst.size()));
    dst = it->second.values;
  };
  fetch(prefix + ".bn_node.running_mean", bn_node_.running_mean);
  fetch(prefix + ".bn_node.running_var", bn_node_.running_var);
  fetch(prefix + ".bn_edge.running_mean", bn_edge_.running_mean);
  fetch(prefix + ".bn_edge.running_var", bn_edge_.running_var);
}

}  // namespace molpool
