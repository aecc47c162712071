#include "molpool/graph.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace molpool {

namespace {

struct Adjacency {
  // per node: (neighbor, edge id), sorted by neighbor
  std::vector<std::vector<std::pair<long, long>>> nbrs;

  Adjacency(long n, const std::vector<std::array<long, 2>>& edges)
      : nbrs(static_cast<std::size_t>(n)) {
    for (long e = 0; e < static_cast<long>(edges.size()); ++e) {
      nbrs[edges[e][0]].push_back({edges[e][1], e});
      nbrs[edges[e][1]].push_back({edges[e][0], e});
    }
    for (auto& v : nbrs) std::sort(v.begin(), v.end());
  }
};

}  // namespace

PoolPlan plan_pool(long num_nodes,
                   const std::vector<std::array<long, 2>>& edges,
                   const std::vector<long>& kept_in) {
  if (kept_in.empty()) throw std::invalid_argument("plan_pool: empty kept set");
  std::vector<long> kept = kept_in;
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (kept.front() < 0 || kept.back() >= num_nodes)
    throw std::invalid_argument("plan_pool: kept index out of range");

  std::vector<long> local(static_cast<std::size_t>(num_nodes), -1);
  for (long i = 0; i < static_cast<long>(kept.size()); ++i) local[kept[i]] = i;
  auto is_kept = [&](long v) { return local[v] >= 0; };

  Adjacency adj(num_nodes, edges);
  std::map<std::pair<long, long>, std::vector<EdgeProvenance>> groups;

  auto group_key = [&](long a, long b) {
    const long la = local[a], lb = local[b];
    return std::make_pair(std::min(la, lb), std::max(la, lb));
  };

  // kept-kept edges survive as-is
  for (long e = 0; e < static_cast<long>(edges.size()); ++e) {
    const long a = edges[e][0], b = edges[e][1];
    if (is_kept(a) && is_kept(b))
      groups[group_key(a, b)].push_back(
          {EdgeProvenance::Kind::KeptEdge, {e}, {}});
  }

  // kept - dropped - kept
  for (long d = 0; d < num_nodes; ++d) {
    if (is_kept(d)) continue;
    const auto& nb = adj.nbrs[d];
    for (std::size_t x = 0; x < nb.size(); ++x) {
      if (!is_kept(nb[x].first)) continue;
      for (std::size_t y = x + 1; y < nb.size(); ++y) {
        if (!is_kept(nb[y].first)) continue;
        groups[group_key(nb[x].first, nb[y].first)].push_back(
            {EdgeProvenance::Kind::OneHop, {nb[x].second, nb[y].second}, {d}});
      }
    }
  }

  // kept - dropped - dropped - kept; enumerated per dropped-dropped edge so
  // each simple path appears exactly once
  for (long e = 0; e < static_cast<long>(edges.size()); ++e) {
    const long d1 = edges[e][0], d2 = edges[e][1];
    if (is_kept(d1) || is_kept(d2)) continue;
    for (const auto& [u, eu] : adj.nbrs[d1]) {
      if (!is_kept(u)) continue;
      for (const auto& [v, ev] : adj.nbrs[d2]) {
        if (!is_kept(v) || u == v) continue;
        EdgeProvenance prov{EdgeProvenance::Kind::TwoHop, {}, {}};
        if (local[u] <= local[v]) {
          prov.path_edges = {eu, e, ev};
          prov.dropped = {d1, d2};
        } else {
          prov.path_edges = {ev, e, eu};
          prov.dropped = {d2, d1};
        }
        groups[group_key(u, v)].push_back(std::move(prov));
      }
    }
  }

  PoolPlan plan;
  plan.kept = std::move(kept);
  plan.groups.reserve(groups.size());
  for (auto& [key, provs] : groups)
    plan.groups.push_back({key.first, key.second, std::move(provs)});
  return plan;
}

GraphBatch extract_skeleton(const GraphBatch& batch,
                            const std::vector<PoolPlan>& plans,
                            std::vector<long>* kept_rows_out) {
  if (static_cast<int>(plans.size()) != batch.graph_count)
    throw std::invalid_argument("extract_skeleton: one plan per graph required");

  // per-graph node offsets in the incoming batch
  std::vector<long> old_offset(batch.graph_count + 1, 0);
  for (int id : batch.node_graph_id) ++old_offset[id + 1];
  for (int g = 0; g < batch.graph_count; ++g)
    old_offset[g + 1] += old_offset[g];

  GraphBatch out;
  out.graph_count = batch.graph_count;
  std::vector<long> kept_rows;
  std::vector<long> new_offset(batch.graph_count + 1, 0);
  for (int g = 0; g < batch.graph_count; ++g) {
    new_offset[g + 1] =
        new_offset[g] + static_cast<long>(plans[g].kept.size());
    for (long k : plans[g].kept) {
      kept_rows.push_back(old_offset[g] + k);
      out.node_graph_id.push_back(g);
    }
    for (const PoolGroup& grp : plans[g].groups) {
      out.edges.push_back({new_offset[g] + grp.u, new_offset[g] + grp.v});
      out.edge_graph_id.push_back(g);
    }
  }

  out.node_feats = Tensor::zeros({static_cast<long>(kept_rows.size()), 0});
  out.edge_feats = Tensor::zeros({static_cast<long>(out.edges.size()), 0});
  if (kept_rows_out) *kept_rows_out = std::move(kept_rows);
  return out;
}

}  // namespace molpool
