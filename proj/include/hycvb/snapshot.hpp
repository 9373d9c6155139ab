#pragma once

// Versioned line-oriented model snapshots. Responsibilities are not stored;
// they can be recomputed from the component statistics. Layout is described
// in README.md. Reals use the shortest round-trip decimal form, so a save
// followed by a load reproduces every value exactly.

#include <iosfwd>
#include <variant>

#include "hycvb/dpmm.hpp"
#include "hycvb/hdplda.hpp"

namespace hycvb {

inline constexpr int kSnapshotVersion = 1;

struct HdpModel {
  HdpHyper hyper;
  HdpMode mode = HdpMode::HCSVB0;
  HdpState state;
};

using ModelSnapshot = std::variant<DpmmModel, HdpModel>;

void save_snapshot(const DpmmModel& model, std::ostream& out);
void save_snapshot(const HdpModel& model, std::ostream& out);

/// Throws ParseError on a malformed or unsupported snapshot.
ModelSnapshot load_snapshot(std::istream& in);

}  // namespace hycvb
