#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "molpool/graph.hpp"

namespace molpool::chem {

enum class BondOrder { Single, Double, Triple, Aromatic };

const char* bond_order_name(BondOrder o);

struct Atom {
  std::string element;
  bool aromatic = false;
  int degree = 0;
};

struct Bond {
  int i = 0, j = 0;  // i < j
  BondOrder order = BondOrder::Single;
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
};

// Parse error carrying the 0-based offset into the SMILES string.
class SmilesError : public std::runtime_error {
 public:
  SmilesError(const std::string& what, std::size_t position);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// Heavy-atom SMILES subset: organic-subset atoms (B C N O P S F Cl Br I),
// aromatic lowercase (b c n o p s), bracket atoms with charge, branches,
// ring closures (digit and %nn), bonds - = # :. Hydrogens are never
// materialized; stereo bond marks / \ degrade to single; dots are rejected.
Molecule parse_smiles(const std::string& smiles);

// Node features: one-hot over [B C N O F P S Cl Br I other] + degree entry
// (12 channels). Edge features: one-hot over [single double triple aromatic]
// (4 channels). Unknown elements bucket to "other".
inline constexpr long kNodeFeatureDim = 12;
inline constexpr long kEdgeFeatureDim = 4;

MolGraph featurize(const Molecule& m);

struct DatasetRecord {
  std::string smiles;
  // One entry per task; missing labels (empty CSV cells) are nullopt.
  std::vector<std::optional<double>> targets;
};

struct CsvLoadResult {
  std::vector<DatasetRecord> records;
  std::size_t skipped = 0;  // rows whose SMILES failed to parse
  std::vector<std::string> warnings;
};

CsvLoadResult load_csv(const std::string& path,
                       const std::string& smiles_column,
                       const std::vector<std::string>& target_columns);

}  // namespace molpool::chem
