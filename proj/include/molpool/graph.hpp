#pragma once

#include <array>
#include <vector>

#include "molpool/tensor.hpp"

namespace molpool {

// One molecule: node feature matrix, undirected edges stored once with
// i < j, edge feature matrix aligned with the edge list.
struct MolGraph {
  Tensor node_feats;                       // n x c_n
  std::vector<std::array<long, 2>> edges;  // (i, j), i < j
  Tensor edge_feats;                       // m x c_e

  long num_nodes() const { return node_feats.rows(); }
  long num_edges() const { return static_cast<long>(edges.size()); }
};

// Several molecules concatenated, with per-node and per-edge membership ids.
struct GraphBatch {
  Tensor node_feats;
  std::vector<std::array<long, 2>> edges;
  Tensor edge_feats;
  std::vector<int> node_graph_id;
  std::vector<int> edge_graph_id;
  int graph_count = 0;

  long num_nodes() const { return node_feats.rows(); }
  long num_edges() const { return static_cast<long>(edges.size()); }
};

GraphBatch make_batch(const std::vector<MolGraph>& graphs);

// K = ceil(rho * n), clamped to [1, n]. rho must lie in (0, 1].
long keep_count(long n, double rho);

// How a new edge between two kept nodes came to exist.
struct EdgeProvenance {
  enum class Kind { KeptEdge, OneHop, TwoHop };
  Kind kind;
  // Original edge ids along the path, in order u..v (1, 2, or 3 entries).
  std::vector<long> path_edges;
  // Dropped interior node ids, in path order (0, 1, or 2 entries).
  std::vector<long> dropped;
};

// New edge between kept-local endpoints u < v with every surviving path.
struct PoolGroup {
  long u = 0, v = 0;  // kept-local indices
  std::vector<EdgeProvenance> provenances;
};

struct PoolPlan {
  std::vector<long> kept;  // sorted original node ids
  std::vector<PoolGroup> groups;
};

// Structural half of pooling: enumerate kept-kept edges plus paths through
// one or two dropped interior nodes, grouped per unordered kept pair.
// Dangling dropped nodes vanish; u == v paths are discarded.
PoolPlan plan_pool(long num_nodes,
                   const std::vector<std::array<long, 2>>& edges,
                   const std::vector<long>& kept);

// Renumbers kept nodes contiguously (original relative order preserved) and
// lays out one edge per plan group. Feature tensors come back zero-width;
// the model layers fill them. kept_rows_out receives the original batch row
// of every new node.
GraphBatch extract_skeleton(const GraphBatch& batch,
                            const std::vector<PoolPlan>& plans,
                            std::vector<long>* kept_rows_out = nullptr);

}  // namespace molpool
