#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "molpool/chem.hpp"
#include "molpool/export.hpp"
#include "molpool/graph.hpp"

using namespace molpool;

namespace {

using Edges = std::vector<std::array<long, 2>>;

// signature of one surviving path: sorted original edge ids
using PathSig = std::vector<long>;
// per unordered original kept pair: multiset of path signatures
using GroupMap = std::map<std::pair<long, long>, std::multiset<PathSig>>;

GroupMap plan_to_groups(const PoolPlan& plan) {
  GroupMap out;
  for (const PoolGroup& g : plan.groups) {
    const long u = plan.kept[g.u], v = plan.kept[g.v];
    auto& slot = out[{std::min(u, v), std::max(u, v)}];
    for (const EdgeProvenance& p : g.provenances) {
      PathSig sig = p.path_edges;
      std::sort(sig.begin(), sig.end());
      slot.insert(std::move(sig));
    }
  }
  return out;
}

// Independent oracle: enumerate every simple path of <= 3 edges between
// kept pairs whose interior nodes are all dropped.
GroupMap brute_force_groups(long n, const Edges& edges,
                            const std::vector<long>& kept) {
  std::set<long> kept_set(kept.begin(), kept.end());
  std::map<std::pair<long, long>, long> edge_id;
  for (long e = 0; e < static_cast<long>(edges.size()); ++e)
    edge_id[{edges[e][0], edges[e][1]}] = e;
  auto find_edge = [&](long a, long b) -> long {
    auto it = edge_id.find({std::min(a, b), std::max(a, b)});
    return it == edge_id.end() ? -1 : it->second;
  };

  GroupMap out;
  for (long u : kept)
    for (long v : kept) {
      if (u >= v) continue;
      auto& slot = out[{u, v}];
      if (long e = find_edge(u, v); e >= 0) slot.insert({e});
      for (long x = 0; x < n; ++x) {
        if (kept_set.count(x)) continue;
        const long e1 = find_edge(u, x), e2 = find_edge(x, v);
        if (e1 >= 0 && e2 >= 0) {
          PathSig sig{e1, e2};
          std::sort(sig.begin(), sig.end());
          slot.insert(std::move(sig));
        }
        for (long y = 0; y < n; ++y) {
          if (y == x || kept_set.count(y)) continue;
          const long f1 = find_edge(u, x), f2 = find_edge(x, y),
                     f3 = find_edge(y, v);
          if (f1 >= 0 && f2 >= 0 && f3 >= 0) {
            PathSig sig{f1, f2, f3};
            std::sort(sig.begin(), sig.end());
            slot.insert(std::move(sig));
          }
        }
      }
      if (slot.empty()) out.erase({u, v});
    }
  return out;
}

Edges random_edges(long n, double density, std::mt19937_64& rng) {
  Edges edges;
  std::bernoulli_distribution coin(density);
  for (long i = 0; i < n; ++i)
    for (long j = i + 1; j < n; ++j)
      if (coin(rng)) edges.push_back({i, j});
  return edges;
}

MolGraph tiny_graph(long n, const Edges& edges, long cn = 3, long ce = 2) {
  MolGraph g;
  std::vector<double> nf(n * cn);
  for (std::size_t i = 0; i < nf.size(); ++i) nf[i] = static_cast<double>(i);
  g.node_feats = Tensor::from(std::move(nf), {n, cn});
  g.edges = edges;
  std::vector<double> ef(edges.size() * ce);
  for (std::size_t i = 0; i < ef.size(); ++i) ef[i] = static_cast<double>(i) + 1;
  g.edge_feats = Tensor::from(std::move(ef), {static_cast<long>(edges.size()), ce});
  return g;
}

}  // namespace

TEST_CASE("make_batch: offsets and membership ids") {
  MolGraph a = tiny_graph(2, {{0, 1}});
  MolGraph b = tiny_graph(3, {{0, 1}, {1, 2}});
  GraphBatch batch = make_batch({a, b});
  CHECK(batch.num_nodes() == 5);
  CHECK(batch.node_graph_id == std::vector<int>{0, 0, 1, 1, 1});
  for (std::size_t e = 1; e < batch.edges.size(); ++e) {
    CHECK(batch.edges[e][0] >= 2);
    CHECK(batch.edges[e][1] >= 2);
  }
  CHECK(batch.edge_graph_id == std::vector<int>{0, 1, 1});

  GraphBatch single = make_batch({a});
  CHECK(single.node_feats.values() == a.node_feats.values());
  CHECK(single.edges == a.edges);

  MolGraph bad = tiny_graph(2, {{0, 1}}, 5, 2);
  CHECK_THROWS_AS(make_batch({a, bad}), std::invalid_argument);
}

TEST_CASE("keep_count: ceil with clamp") {
  CHECK(keep_count(10, 0.5) == 5);
  CHECK(keep_count(7, 0.5) == 4);
  CHECK(keep_count(1, 0.1) == 1);
  CHECK(keep_count(1, 1.0) == 1);
  CHECK(keep_count(6, 1.0) == 6);
  CHECK_THROWS_AS(keep_count(5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(keep_count(5, 1.3), std::invalid_argument);
  CHECK_THROWS_AS(keep_count(0, 0.5), std::invalid_argument);
}

TEST_CASE("plan_pool: path graph gives one one-hop group") {
  PoolPlan plan = plan_pool(3, {{0, 1}, {1, 2}}, {0, 2});
  REQUIRE(plan.groups.size() == 1);
  CHECK(plan.groups[0].u == 0);
  CHECK(plan.groups[0].v == 1);  // kept-local index of node 2
  REQUIRE(plan.groups[0].provenances.size() == 1);
  const auto& p = plan.groups[0].provenances[0];
  CHECK(p.kind == EdgeProvenance::Kind::OneHop);
  CHECK(p.dropped == std::vector<long>{1});
  CHECK(p.path_edges == std::vector<long>{0, 1});
}

TEST_CASE("plan_pool: square kept {0,3} merges kept edge with two-hop path") {
  // 0-1-2-3-0
  PoolPlan plan = plan_pool(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}, {0, 3});
  REQUIRE(plan.groups.size() == 1);
  const auto& provs = plan.groups[0].provenances;
  REQUIRE(provs.size() == 2);
  CHECK(provs[0].kind == EdgeProvenance::Kind::KeptEdge);
  CHECK(provs[0].path_edges == std::vector<long>{3});
  CHECK(provs[1].kind == EdgeProvenance::Kind::TwoHop);
  CHECK(provs[1].dropped == std::vector<long>{1, 2});
  CHECK(provs[1].path_edges == std::vector<long>{0, 1, 2});
}

TEST_CASE("plan_pool: dangling leaves vanish") {
  // star: center 0 kept, leaves dropped
  PoolPlan plan = plan_pool(4, {{0, 1}, {0, 2}, {0, 3}}, {0});
  CHECK(plan.groups.empty());
}

TEST_CASE("plan_pool: triangle merges kept edge and one-hop") {
  PoolPlan plan = plan_pool(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 2});
  REQUIRE(plan.groups.size() == 1);
  const auto& provs = plan.groups[0].provenances;
  REQUIRE(provs.size() == 2);
  CHECK(provs[0].kind == EdgeProvenance::Kind::KeptEdge);
  CHECK(provs[1].kind == EdgeProvenance::Kind::OneHop);

  CHECK(plan_to_groups(plan) == brute_force_groups(3, {{0, 1}, {1, 2}, {0, 2}}, {0, 2}));
}

TEST_CASE("plan_pool: errors") {
  CHECK_THROWS_AS(plan_pool(3, {{0, 1}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(plan_pool(3, {{0, 1}}, {5}), std::invalid_argument);
}

TEST_CASE("plan_pool equals brute-force oracle on random graphs") {
  std::mt19937_64 rng(101);
  int nonempty = 0;
  for (int rep = 0; rep < 300; ++rep) {
    const long n = 2 + static_cast<long>(rng() % 11);  // up to 12
    const double density = 0.15 + 0.35 * static_cast<double>(rng() % 3);
    Edges edges = random_edges(n, density, rng);
    std::vector<long> all(n);
    for (long i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const long k = 1 + static_cast<long>(rng() % n);
    std::vector<long> kept(all.begin(), all.begin() + k);

    PoolPlan plan = plan_pool(n, edges, kept);
    CHECK(plan_to_groups(plan) == brute_force_groups(n, edges, kept));
    nonempty += !plan.groups.empty();
  }
  CHECK(nonempty > 50);  // the sweep must exercise real structure
}

TEST_CASE("plan_pool structural invariants") {
  std::mt19937_64 rng(202);
  for (int rep = 0; rep < 200; ++rep) {
    const long n = 2 + static_cast<long>(rng() % 11);
    Edges edges = random_edges(n, 0.4, rng);
    std::vector<long> all(n);
    for (long i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const long k = 1 + static_cast<long>(rng() % n);
    std::vector<long> kept(all.begin(), all.begin() + k);
    std::sort(kept.begin(), kept.end());

    PoolPlan plan = plan_pool(n, edges, kept);
    std::set<long> kept_set(kept.begin(), kept.end());
    std::set<std::pair<long, long>> seen_pairs;
    for (const PoolGroup& g : plan.groups) {
      CHECK(g.u < g.v);  // no self-pairs
      CHECK(seen_pairs.insert({g.u, g.v}).second);  // no duplicate pairs
      CHECK(g.u >= 0);
      CHECK(g.v < static_cast<long>(plan.kept.size()));
      for (const EdgeProvenance& p : g.provenances)
        for (long d : p.dropped) CHECK_FALSE(kept_set.count(d));
    }
  }
}

TEST_CASE("plan_pool is invariant under relabeling") {
  std::mt19937_64 rng(303);
  for (int rep = 0; rep < 100; ++rep) {
    const long n = 3 + static_cast<long>(rng() % 9);
    Edges edges = random_edges(n, 0.4, rng);
    std::vector<long> all(n), perm(n);
    for (long i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    const long k = 1 + static_cast<long>(rng() % n);
    std::vector<long> kept(all.begin(), all.begin() + k);
    for (long i = 0; i < n; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    Edges relabeled;
    for (const auto& e : edges) {
      const long a = perm[e[0]], b = perm[e[1]];
      relabeled.push_back({std::min(a, b), std::max(a, b)});
    }
    std::vector<long> kept_rel;
    for (long v : kept) kept_rel.push_back(perm[v]);

    // compare pair structure and per-pair path counts through the relabeling
    GroupMap orig = plan_to_groups(plan_pool(n, edges, kept));
    GroupMap rel = plan_to_groups(plan_pool(n, relabeled, kept_rel));

    std::map<std::pair<long, long>, std::multiset<std::size_t>> a, b;
    for (const auto& [pair, sigs] : orig) {
      std::multiset<std::size_t> lens;
      for (const auto& s : sigs) lens.insert(s.size());
      const long pu = perm[pair.first], pv = perm[pair.second];
      a[{std::min(pu, pv), std::max(pu, pv)}] = lens;
    }
    for (const auto& [pair, sigs] : rel) {
      std::multiset<std::size_t> lens;
      for (const auto& s : sigs) lens.insert(s.size());
      b[pair] = lens;
    }
    CHECK(a == b);
  }
}

TEST_CASE("extract_skeleton: renumbering and per-graph independence") {
  MolGraph g1 = tiny_graph(3, {{0, 1}, {1, 2}});
  MolGraph g2 = tiny_graph(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
  GraphBatch batch = make_batch({g1, g2});

  std::vector<PoolPlan> plans;
  plans.push_back(plan_pool(3, g1.edges, {0, 2}));
  plans.push_back(plan_pool(4, g2.edges, {0, 3}));

  std::vector<long> rows;
  GraphBatch skel = extract_skeleton(batch, plans, &rows);
  CHECK(skel.num_nodes() == 4);
  CHECK(rows == std::vector<long>{0, 2, 3, 6});
  CHECK(skel.node_graph_id == std::vector<int>{0, 0, 1, 1});
  REQUIRE(skel.edges.size() == 2);
  CHECK(skel.edges[0] == std::array<long, 2>{0, 1});
  CHECK(skel.edges[1] == std::array<long, 2>{2, 3});
  CHECK(skel.edge_graph_id == std::vector<int>{0, 1});
  CHECK(std::is_sorted(skel.node_graph_id.begin(), skel.node_graph_id.end()));

  // plan with zero new edges leaves an edgeless graph
  MolGraph star = tiny_graph(4, {{0, 1}, {0, 2}, {0, 3}});
  GraphBatch sb = make_batch({star});
  GraphBatch sk = extract_skeleton(sb, {plan_pool(4, star.edges, {0})});
  CHECK(sk.num_nodes() == 1);
  CHECK(sk.edges.empty());
}

TEST_CASE("dot and json export are well-formed") {
  StageGraph g;
  g.name = "stage0";
  g.node_labels = {"C", "C", "O"};
  g.kept = {true, false, true};
  g.edges = {{0, 1}, {1, 2}};
  g.edge_labels = {"single", "single"};

  const std::string dot = to_dot(g);
  CHECK(dot.find("graph \"stage0\" {") != std::string::npos);
  CHECK(dot.find("n0 -- n1") != std::string::npos);
  CHECK(dot.find("fillcolor=gold") != std::string::npos);
  CHECK(dot.find("fillcolor=lightblue") != std::string::npos);
  CHECK(dot.rfind("}\n") == dot.size() - 2);
  // braces balance
  CHECK(std::count(dot.begin(), dot.end(), '{') ==
        std::count(dot.begin(), dot.end(), '}'));

  const std::string js = to_json(g);
  CHECK(js.find("\"source\"") != std::string::npos);
}
