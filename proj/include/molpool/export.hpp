#pragma once

#include <array>
#include <string>
#include <vector>

namespace molpool {

// One molecule at one pooling stage, ready for rendering.
struct StageGraph {
  std::string name;
  std::vector<std::string> node_labels;
  // Nodes surviving the next pooling step; empty means no annotation.
  std::vector<bool> kept;
  std::vector<double> scores;  // empty when the stage carries no scores
  std::vector<std::array<long, 2>> edges;
  std::vector<std::string> edge_labels;  // empty or one per edge
};

std::string to_dot(const StageGraph& g);
std::string to_json(const StageGraph& g);

}  // namespace molpool
