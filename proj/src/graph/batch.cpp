#include "molpool/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace molpool {

GraphBatch make_batch(const std::vector<MolGraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("make_batch: empty list");
  const long cn = graphs[0].node_feats.cols();
  const long ce = graphs[0].edge_feats.cols();

  long total_nodes = 0, total_edges = 0;
  for (const MolGraph& g : graphs) {
    if (g.node_feats.cols() != cn || g.edge_feats.cols() != ce)
      throw std::invalid_argument(
          "make_batch: feature width mismatch, expected nodes " +
          std::to_string(cn) + "/edges " + std::to_string(ce) + ", got " +
          g.node_feats.shape_str() + "/" + g.edge_feats.shape_str());
    total_nodes += g.num_nodes();
    total_edges += g.num_edges();
  }

  GraphBatch batch;
  batch.graph_count = static_cast<int>(graphs.size());
  std::vector<double> nodes;
  nodes.reserve(total_nodes * cn);
  std::vector<double> edges_f;
  edges_f.reserve(total_edges * ce);
  batch.edges.reserve(total_edges);
  batch.node_graph_id.reserve(total_nodes);
  batch.edge_graph_id.reserve(total_edges);

  long offset = 0;
  int gid = 0;
  for (const MolGraph& g : graphs) {
    nodes.insert(nodes.end(), g.node_feats.values().begin(),
                 g.node_feats.values().end());
    edges_f.insert(edges_f.end(), g.edge_feats.values().begin(),
                   g.edge_feats.values().end());
    for (long i = 0; i < g.num_nodes(); ++i) batch.node_graph_id.push_back(gid);
    for (const auto& e : g.edges) {
      batch.edges.push_back({e[0] + offset, e[1] + offset});
      batch.edge_graph_id.push_back(gid);
    }
    offset += g.num_nodes();
    ++gid;
  }
  batch.node_feats = Tensor::from(std::move(nodes), {total_nodes, cn});
  batch.edge_feats = Tensor::from(std::move(edges_f), {total_edges, ce});
  return batch;
}

long keep_count(long n, double rho) {
  if (n < 1) throw std::invalid_argument("keep_count: empty graph");
  if (!(rho > 0.0) || rho > 1.0)
    throw std::invalid_argument("keep_count: rho must lie in (0, 1], got " +
                                std::to_string(rho));
  const long k = static_cast<long>(std::ceil(rho * static_cast<double>(n)));
  return std::max(1L, std::min(k, n));
}

}  // namespace molpool
