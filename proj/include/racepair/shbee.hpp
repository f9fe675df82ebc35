#pragma once

// Phase 1 of all-pairs race prediction. A single pass that, per variable,
// keeps the most recent set of mutually relevant accesses as epochs,
// reports concurrent pairs against that set, and records an immediate
// predecessor edge whenever an epoch is superseded by a later access it
// happens before.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "racepair/race.hpp"
#include "racepair/shb.hpp"
#include "racepair/trace.hpp"
#include "racepair/vclock.hpp"

namespace racepair {

struct ShbeeOptions {
  // Keep writes in the recent set until a later write supersedes them, and
  // never report read-read pairs.
  bool optimized = false;
  // Record clocks and edges for post-processing. Without them the pass keeps
  // only O(threads) epochs per variable.
  bool keep_post_data = true;
};

using EpochPair = std::pair<Epoch, Epoch>;

struct ShbeeVariable {
  std::vector<Epoch> recent;      // RW(x)
  std::vector<EpochPair> conc;    // Conc(x), in discovery order
  std::size_t edge_count = 0;
  std::size_t max_recent = 0;     // largest |RW(x)| seen during the pass
};

struct ShbeeState {
  std::vector<ShbeeVariable> vars;
  // Edge(x) as predecessor lists keyed by the successor's position, each
  // sorted by predecessor position. Positions are unique across variables.
  std::vector<std::vector<Epoch>> preds;
  // evt: reads after absorbing the last write, writes before incrementing.
  std::vector<VectorClock> clocks;
  std::vector<RacePair> wrd_pairs;
  bool optimized = false;
  bool has_post_data = false;

  /// All edges of one variable as (predecessor, successor) pairs sorted by
  /// successor then predecessor position.
  std::vector<EpochPair> edges(Slot variable, const Trace& t) const {
    std::vector<EpochPair> out;
    for (Pos p = 1; p < preds.size(); ++p) {
      if (preds[p].empty() || t.object_slot(p) != variable) continue;
      const Event& e = t.at(p);
      Epoch succ{t.thread_slot(p), clocks[p][t.thread_slot(p)], p,
                 e.op == Op::Write ? Access::Write : Access::Read};
      for (const Epoch& g : preds[p]) out.emplace_back(g, succ);
    }
    return out;
  }
};

/// Invoked after each read/write with the state so far.
using ShbeeObserver = std::function<void(const ShbeeState&, const Event&)>;

inline ShbeeState shbee_run(const Trace& t, ShbeeOptions opts = {}, const ShbeeObserver& observe = {}) {
  ShbeeState st;
  st.optimized = opts.optimized;
  st.has_post_data = opts.keep_post_data;
  st.vars.resize(t.variable_count());
  if (opts.keep_post_data) {
    st.preds.resize(t.size() + 1);
    st.clocks.resize(t.size() + 1);
  }
  detail::ThreadClocks th(t);
  std::vector<detail::LastWrite> last_write(t.variable_count());
  std::vector<Epoch> kept;
  std::vector<Epoch> before;

  for (const Event& e : t.events()) {
    if (th.sync(t, e)) continue;
    const Slot self = t.thread_slot(e.pos);
    const Slot x = t.object_slot(e.pos);
    const bool is_write = e.op == Op::Write;
    VectorClock& clock = th.of(self);
    ShbeeVariable& var = st.vars[x];

    if (!is_write) {
      if (last_write[x].unseen_by(clock))
        st.wrd_pairs.push_back({last_write[x].pos, e.pos, x, RaceKind::WriteReadDep});
      clock.join_with(last_write[x].clock);
    }
    if (opts.keep_post_data) st.clocks[e.pos] = clock;

    const Epoch cur{self, clock[self], e.pos, is_write ? Access::Write : Access::Read};
    kept.clear();
    before.clear();
    for (const Epoch& b : var.recent) {
      const Stamp known = clock[b.thread];
      if (b.stamp > known) {
        if (is_write || !opts.optimized || b.is_write()) var.conc.emplace_back(b, cur);
        kept.push_back(b);
      } else {
        // An equal stamp means the read just absorbed this very write; it is
        // ordered like any other covered epoch and needs its edge too.
        before.push_back(b);
        if (opts.optimized && !is_write && b.is_write()) kept.push_back(b);
      }
    }
    var.edge_count += before.size();
    if (opts.keep_post_data && !before.empty()) {
      std::sort(before.begin(), before.end(), [](const Epoch& a, const Epoch& b) { return a.pos < b.pos; });
      st.preds[e.pos] = before;
    }
    kept.push_back(cur);
    var.recent.swap(kept);
    var.max_recent = std::max(var.max_recent, var.recent.size());

    if (is_write) last_write[x] = {clock, self, e.pos};
    clock.increment(self);
    if (observe) observe(st, e);
  }
  return st;
}

/// Write-read dependency race pairs, found by the same last-write stamp test
/// the pass above uses.
inline std::vector<RacePair> wrd_races(const Trace& t) {
  auto st = shbee_run(t, {.optimized = false, .keep_post_data = false});
  std::sort(st.wrd_pairs.begin(), st.wrd_pairs.end());
  return st.wrd_pairs;
}

}  // namespace racepair
