#include "molpool/chem.hpp"

namespace molpool::chem {

namespace {

// Feature vocabulary; anything else lands in the trailing "other" slot.
constexpr const char* kVocab[] = {"B", "C", "N",  "O",  "F", "P",
                                  "S", "Cl", "Br", "I"};
constexpr long kVocabSize = 10;  // + "other" = 11, + degree = 12

long element_slot(const std::string& symbol) {
  for (long i = 0; i < kVocabSize; ++i)
    if (symbol == kVocab[i]) return i;
  return kVocabSize;  // other
}

long order_slot(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 0;
    case BondOrder::Double: return 1;
    case BondOrder::Triple: return 2;
    case BondOrder::Aromatic: return 3;
  }
  return 0;
}

}  // namespace

MolGraph featurize(const Molecule& m) {
  const long n = static_cast<long>(m.atoms.size());
  const long e = static_cast<long>(m.bonds.size());

  std::vector<double> nodes(n * kNodeFeatureDim, 0.0);
  for (long i = 0; i < n; ++i) {
    nodes[i * kNodeFeatureDim + element_slot(m.atoms[i].element)] = 1.0;
    nodes[i * kNodeFeatureDim + kNodeFeatureDim - 1] =
        static_cast<double>(m.atoms[i].degree);
  }

  std::vector<double> edges_f(e * kEdgeFeatureDim, 0.0);
  std::vector<std::array<long, 2>> edges(e);
  for (long b = 0; b < e; ++b) {
    edges[b] = {m.bonds[b].i, m.bonds[b].j};
    edges_f[b * kEdgeFeatureDim + order_slot(m.bonds[b].order)] = 1.0;
  }

  MolGraph g;
  g.node_feats = Tensor::from(std::move(nodes), {n, kNodeFeatureDim});
  g.edges = std::move(edges);
  g.edge_feats = Tensor::from(std::move(edges_f), {e, kEdgeFeatureDim});
  return g;
}

}  // namespace molpool::chem
