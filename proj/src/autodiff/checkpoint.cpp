#include "molpool/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace molpool {

namespace {
constexpr int kCheckpointVersion = 1;
}

void save_state_dict(const std::string& path, const StateDict& state) {
  nlohmann::json j;
  j["format"] = "molpool-checkpoint";
  j["version"] = kCheckpointVersion;
  nlohmann::json tensors = nlohmann::json::object();
  for (const auto& [name, entry] : state) {
    tensors[name] = {{"shape", entry.shape}, {"values", entry.values}};
  }
  j["tensors"] = std::move(tensors);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("checkpoint: cannot write " + path);
  os << j.dump();
}

StateDict load_state_dict(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint: cannot read " + path);
  nlohmann::json j;
  is >> j;
  if (j.value("format", "") != "molpool-checkpoint")
    throw std::runtime_error("checkpoint: " + path +
                             " is not a molpool checkpoint");
  if (j.value("version", -1) != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  StateDict state;
  for (const auto& [name, entry] : j.at("tensors").items()) {
    StateEntry e;
    e.shape = entry.at("shape").get<std::vector<long>>();
    e.values = entry.at("values").get<std::vector<double>>();
    state[name] = std::move(e);
  }
  return state;
}

}  // namespace molpool
