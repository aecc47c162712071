#include "molpool/export.hpp"

#include <sstream>

#include "json.hpp"

namespace molpool {

namespace {

// Escapes double quotes only; labels may carry DOT escapes such as \n.
std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string to_dot(const StageGraph& g) {
  std::ostringstream os;
  os << "graph " << quote(g.name) << " {\n";
  os << "  node [shape=circle fontsize=10];\n";
  for (std::size_t i = 0; i < g.node_labels.size(); ++i) {
    std::string label = g.node_labels[i];
    if (!g.scores.empty()) {
      std::ostringstream t;
      t.precision(3);
      t << g.scores[i];
      label += "\\n" + t.str();
    }
    os << "  n" << i << " [label=" << quote(label);
    if (!g.kept.empty())
      os << " style=filled fillcolor=" << (g.kept[i] ? "gold" : "lightblue");
    os << "];\n";
  }
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    os << "  n" << g.edges[e][0] << " -- n" << g.edges[e][1];
    if (!g.edge_labels.empty()) os << " [label=" << quote(g.edge_labels[e]) << "]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

std::string to_json(const StageGraph& g) {
  nlohmann::json j;
  j["name"] = g.name;
  j["nodes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < g.node_labels.size(); ++i) {
    nlohmann::json n;
    n["id"] = i;
    n["label"] = g.node_labels[i];
    if (!g.kept.empty()) n["kept"] = static_cast<bool>(g.kept[i]);
    if (!g.scores.empty()) n["score"] = g.scores[i];
    j["nodes"].push_back(std::move(n));
  }
  j["edges"] = nlohmann::json::array();
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    nlohmann::json je;
    je["source"] = g.edges[e][0];
    je["target"] = g.edges[e][1];
    if (!g.edge_labels.empty()) je["label"] = g.edge_labels[e];
    j["edges"].push_back(std::move(je));
  }
  return j.dump(2);
}

}  // namespace molpool
