#pragma once

#include "colp/screeners.hpp"
#include "colp/types.hpp"

namespace colp {

enum class PickProvenance { FromA, FromFreshColp, Appended };

struct SolutionPath {
  IndexSet conditioning;               // C, sorted; includes the data-driven index
  bool data_driven_conditioning = false;
  std::vector<Index> picks;            // selection order; prefixes are S_1 c S_2 c ...
  std::vector<double> rss_trace;       // one value per RSS-phase pick
  std::vector<PickProvenance> provenance;
  std::vector<bool> took_a;            // RSS-comparison outcomes, diagnostics
  std::vector<Index> terminal_a;       // live A list after the last pick

  // picks extended by the terminal A list; the data-driven conditioning
  // index leads when present. Covers all of D.
  std::vector<Index> full_ordering() const;
};

struct FolpOptions {
  // Incremental Q_C updating; the recompute path is the reference used in
  // equivalence tests.
  bool incremental = true;
};

SolutionPath folp_path(const Dataset& ds, const IndexSet& c, Index d_n,
                       const FolpOptions& opts = {}, const Matrix* xxt = nullptr);

// Classical greedy forward regression: each step refits every candidate
// model C u S u {j} and keeps the RSS minimizer (ties to the smallest index).
SolutionPath fr_path(const Dataset& ds, const IndexSet& c, Index d_n);

// log(RSS_S / n) + (|S|/n)(log n + 2 log p)
double ebic_value(const IndexSet& s, const Dataset& ds);

// Minimizing prefix model of the path. The data-driven conditioning index
// counts as part of the selected model; a user-supplied C does not.
IndexSet ebic_select(const SolutionPath& path, const Dataset& ds);

}  // namespace colp
