#pragma once

#include <map>
#include <string>
#include <vector>

namespace molpool {

// Versioned JSON checkpoint: a flat map from entry name to shape + values.
// Covers learnable parameters and batch-norm running statistics alike.
struct StateEntry {
  std::vector<long> shape;
  std::vector<double> values;
};

using StateDict = std::map<std::string, StateEntry>;

void save_state_dict(const std::string& path, const StateDict& state);
StateDict load_state_dict(const std::string& path);

}  // namespace molpool
