#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "init.hpp"
#include "molpool/layers.hpp"

namespace molpool {

TopKPool::TopKPool(long node_width, long edge_width, double rho,
                   PoolVariant variant, int mlp_depth, std::mt19937_64& rng)
    : node_width_(node_width),
      edge_width_(edge_width),
      rho_(rho),
      variant_(variant),
      proj_(detail::init_weight(node_width, 1, rng)) {
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("pool: keep ratio must lie in (0, 1]");
  if (variant == PoolVariant::None)
    throw std::invalid_argument("pool: variant None is not a layer");
  if (variant == PoolVariant::CoarseGrain) {
    path_net_ = Mlp(node_width + edge_width, edge_width, mlp_depth, rng);
    kept_net_ = Mlp(node_width + edge_width, edge_width, mlp_depth, rng);
  }
}

std::pair<Tensor, Tensor> TopKPool::score_and_gate(
    const Tensor& node_feats) const {
  Tensor scores = matmul(node_feats, proj_);
  Tensor gated = mul_rowwise(node_feats, tanh(scores));
  return {scores, gated};
}

GraphBatch TopKPool::forward(const GraphBatch& batch, PoolTrace* trace) {
  if (batch.node_feats.cols() != node_width_ ||
      batch.edge_feats.cols() != edge_width_)
    throw std::invalid_argument(
        "pool: widths " + batch.node_feats.shape_str() + "/" +
        batch.edge_feats.shape_str() + " do not match layer [" +
        std::to_string(node_width_) + "/" + std::to_string(edge_width_) + "]");

  auto [scores, gated] = score_and_gate(batch.node_feats);

  // per-graph node ranges and graph-local edges
  std::vector<long> node_offset(batch.graph_count + 1, 0);
  for (int id : batch.node_graph_id) ++node_offset[id + 1];
  for (int g = 0; g < batch.graph_count; ++g)
    node_offset[g + 1] += node_offset[g];
  std::vector<std::vector<std::array<long, 2>>> local_edges(batch.graph_count);
  std::vector<std::vector<long>> global_edge_rows(batch.graph_count);
  for (long e = 0; e < batch.num_edges(); ++e) {
    const int g = batch.edge_graph_id[e];
    local_edges[g].push_back({batch.edges[e][0] - node_offset[g],
                              batch.edges[e][1] - node_offset[g]});
    global_edge_rows[g].push_back(e);
  }

  // top-K selection per graph; ties break toward the lower original index
  std::vector<PoolPlan> plans(batch.graph_count);
  if (trace) trace->graphs.assign(batch.graph_count, {});
  for (int g = 0; g < batch.graph_count; ++g) {
    const long n_g = node_offset[g + 1] - node_offset[g];
    if (n_g == 0) throw std::invalid_argument("pool: empty graph in batch");
    const long k = keep_count(n_g, rho_);
    std::vector<long> order(n_g);
    std::iota(order.begin(), order.end(), 0);
    const double* y = scores.values().data() + node_offset[g];
    std::sort(order.begin(), order.end(), [&](long a, long b) {
      if (y[a] != y[b]) return y[a] > y[b];
      return a < b;
    });
    std::vector<long> kept(order.begin(), order.begin() + k);
    std::sort(kept.begin(), kept.end());
    plans[g] = plan_pool(n_g, local_edges[g], kept);
    if (trace) {
      trace->graphs[g].kept = kept;
      trace->graphs[g].scores.assign(y, y + n_g);
      trace->graphs[g].plan = plans[g];
    }
  }

  std::vector<long> kept_rows;
  GraphBatch out = extract_skeleton(batch, plans, &kept_rows);
  out.node_feats = row_gather(gated, kept_rows);

  const long total_groups = static_cast<long>(out.edges.size());
  if (total_groups == 0) {
    out.edge_feats = Tensor::zeros({0, edge_width_});
    return out;
  }

  if (variant_ == PoolVariant::Simple) {
    // new edge feature = sum of edge features over every path of the group
    std::vector<long> rows;
    std::vector<int> group_of;
    long group_idx = 0;
    for (int g = 0; g < batch.graph_count; ++g) {
      for (const PoolGroup& grp : plans[g].groups) {
        for (const EdgeProvenance& prov : grp.provenances)
          for (long local_e : prov.path_edges) {
            rows.push_back(global_edge_rows[g][local_e]);
            group_of.push_back(static_cast<int>(group_idx));
          }
        ++group_idx;
      }
    }
    out.edge_feats = segment_reduce(row_gather(batch.edge_feats, rows),
                                    group_of, SegmentMode::Sum, total_groups);
    return out;
  }

  // CoarseGrain: dropped-path provenances run through path_net on summed
  // interior node features (pre-gate) and summed path edge features; kept
  // edges run through kept_net on gated endpoint features.
  std::vector<long> path_node_rows, path_edge_rows;
  std::vector<int> path_node_pid, path_edge_pid;
  std::vector<int> path_group, kept_group;
  std::vector<long> kept_u_rows, kept_v_rows, kept_edge_rows;
  long path_count = 0;
  long group_idx = 0;
  for (int g = 0; g < batch.graph_count; ++g) {
    const long off = node_offset[g];
    for (const PoolGroup& grp : plans[g].groups) {
      for (const EdgeProvenance& prov : grp.provenances) {
        if (prov.kind == EdgeProvenance::Kind::KeptEdge) {
          kept_u_rows.push_back(off + plans[g].kept[grp.u]);
          kept_v_rows.push_back(off + plans[g].kept[grp.v]);
          kept_edge_rows.push_back(global_edge_rows[g][prov.path_edges[0]]);
          kept_group.push_back(static_cast<int>(group_idx));
        } else {
          for (long d : prov.dropped) {
            path_node_rows.push_back(off + d);
            path_node_pid.push_back(static_cast<int>(path_count));
          }
          for (long local_e : prov.path_edges) {
            path_edge_rows.push_back(global_edge_rows[g][local_e]);
            path_edge_pid.push_back(static_cast<int>(path_count));
          }
          path_group.push_back(static_cast<int>(group_idx));
          ++path_count;
        }
      }
      ++group_idx;
    }
  }

  std::vector<Tensor> prov_feats;
  std::vector<int> prov_groups;
  if (path_count > 0) {
    Tensor interior =
        segment_reduce(row_gather(batch.node_feats, path_node_rows),
                       path_node_pid, SegmentMode::Sum, path_count);
    Tensor along =
        segment_reduce(row_gather(batch.edge_feats, path_edge_rows),
                       path_edge_pid, SegmentMode::Sum, path_count);
    prov_feats.push_back(path_net_.forward(concat({interior, along}, 1)));
    prov_groups.insert(prov_groups.end(), path_group.begin(),
                       path_group.end());
  }
  if (!kept_group.empty()) {
    Tensor endpoint_sum =
        add(row_gather(gated, kept_u_rows), row_gather(gated, kept_v_rows));
    Tensor kept_in =
        concat({endpoint_sum, row_gather(batch.edge_feats, kept_edge_rows)}, 1);
    prov_feats.push_back(kept_net_.forward(kept_in));
    prov_groups.insert(prov_groups.end(), kept_group.begin(),
                       kept_group.end());
  }
  out.edge_feats = segment_reduce(concat(prov_feats, 0), prov_groups,
                                  SegmentMode::Sum, total_groups);
  return out;
}

void TopKPool::collect(const std::string& prefix, NamedTensors& params) const {
  params.push_back({prefix + ".proj", proj_});
  if (variant_ == PoolVariant::CoarseGrain) {
    path_net_.collect(prefix + ".path_net", params);
    kept_net_.collect(prefix + ".kept_net", params);
  }
}

}  // namespace molpool
