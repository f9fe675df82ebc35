#pragma once

// Phase 2: close the phase-1 concurrent pairs of a variable under the
// recorded predecessor edges, then drop candidates whose first epoch the
// second event's clock already covers.

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "racepair/shbee.hpp"
#include "racepair/vclock.hpp"

namespace racepair {

struct AccSet {
  std::vector<EpochPair> pairs;  // sorted by (pos first, pos second)
  std::size_t enqueued = 0;      // worklist insertions, seeds included
};

namespace detail {
inline std::uint64_t pair_key(const EpochPair& p) { return (std::uint64_t{p.first.pos} << 32) | p.second.pos; }
}  // namespace detail

/// Worklist closure: seeded with `conc`, repeatedly takes the pair whose
/// first epoch comes earliest in the trace (ties by the second), keeps it,
/// and enqueues (g, second) for every immediate predecessor g of its first
/// epoch. A pair is never enqueued twice.
inline AccSet expand(std::span<const EpochPair> conc, const std::vector<std::vector<Epoch>>& preds) {
  AccSet acc;
  std::map<std::pair<Pos, Pos>, EpochPair> worklist;
  std::unordered_set<std::uint64_t> seen;
  auto enqueue = [&](const EpochPair& p) {
    if (!seen.insert(detail::pair_key(p)).second) return;
    worklist.emplace(std::pair{p.first.pos, p.second.pos}, p);
    ++acc.enqueued;
  };
  for (const EpochPair& p : conc) enqueue(p);

  while (!worklist.empty()) {
    auto node = worklist.extract(worklist.begin());
    const EpochPair& p = node.mapped();
    acc.pairs.push_back(p);
    if (p.first.pos >= preds.size()) throw std::logic_error("edge endpoint without a position record");
    for (const Epoch& g : preds[p.first.pos]) enqueue({g, p.second});
  }
  std::sort(acc.pairs.begin(), acc.pairs.end(), [](const EpochPair& a, const EpochPair& b) {
    return std::pair{a.first.pos, a.second.pos} < std::pair{b.first.pos, b.second.pos};
  });
  return acc;
}

/// Keeps (a, b) only if b's recorded clock has not reached a's stamp in a's
/// thread slot, i.e. a does not happen before b.
inline AccSet eliminate(const AccSet& acc, const std::vector<VectorClock>& clocks) {
  AccSet out;
  out.enqueued = acc.enqueued;
  for (const EpochPair& p : acc.pairs) {
    if (p.second.pos >= clocks.size() || clocks[p.second.pos].size() == 0)
      throw std::logic_error("no recorded clock for position " + std::to_string(p.second.pos));
    if (p.first.stamp > clocks[p.second.pos][p.first.thread]) out.pairs.push_back(p);
  }
  return out;
}

/// eliminate(expand(conc, preds), clocks) without building the rejected
/// candidates: a candidate whose first epoch the second event's clock covers
/// is dropped on the spot and its predecessors are not visited, since edges
/// are sound and every predecessor is then covered too. `enqueued` counts
/// visited candidates.
inline AccSet expand_pruned(std::span<const EpochPair> conc, const std::vector<std::vector<Epoch>>& preds,
                            const std::vector<VectorClock>& clocks) {
  std::vector<EpochPair> seeds(conc.begin(), conc.end());
  std::stable_sort(seeds.begin(), seeds.end(),
                   [](const EpochPair& a, const EpochPair& b) { return a.second.pos < b.second.pos; });
  AccSet acc;
  std::vector<std::uint32_t> mark(preds.size(), 0);
  std::uint32_t generation = 0;
  std::vector<Epoch> stack;

  for (std::size_t i = 0; i < seeds.size();) {
    const Epoch beta = seeds[i].second;
    if (beta.pos >= clocks.size() || clocks[beta.pos].size() == 0)
      throw std::logic_error("no recorded clock for position " + std::to_string(beta.pos));
    const VectorClock& seen_by_beta = clocks[beta.pos];
    ++generation;
    auto visit = [&](const Epoch& g) {
      if (g.pos >= preds.size()) throw std::logic_error("edge endpoint without a position record");
      if (mark[g.pos] == generation) return;
      mark[g.pos] = generation;
      stack.push_back(g);
      ++acc.enqueued;
    };
    for (; i < seeds.size() && seeds[i].second.pos == beta.pos; ++i) visit(seeds[i].first);
    while (!stack.empty()) {
      Epoch g = stack.back();
      stack.pop_back();
      if (g.stamp <= seen_by_beta[g.thread]) continue;
      acc.pairs.emplace_back(g, beta);
      for (const Epoch& p : preds[g.pos]) visit(p);
    }
  }
  std::sort(acc.pairs.begin(), acc.pairs.end(), [](const EpochPair& a, const EpochPair& b) {
    return std::pair{a.first.pos, a.second.pos} < std::pair{b.first.pos, b.second.pos};
  });
  return acc;
}

/// All concurrent pairs of one variable from a phase-1 run.
inline AccSet post_process(const ShbeeState& st, Slot variable) {
  if (!st.has_post_data) throw std::logic_error("phase-1 run did not keep clocks and edges");
  return expand_pruned(st.vars.at(variable).conc, st.preds, st.clocks);
}

}  // namespace racepair
