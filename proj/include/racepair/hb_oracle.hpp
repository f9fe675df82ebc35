#pragma once

// Ground truth for testing: the schedulable happens-before relation
// materialized as a transitively closed reachability table, and the race
// sets defined directly on top of it. Nothing here uses vector clocks.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

#include "racepair/race.hpp"
#include "racepair/trace.hpp"

namespace racepair {

class HbRelation {
 public:
  HbRelation() = default;
  explicit HbRelation(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

  std::size_t size() const { return n_; }

  /// True iff the event at `a` happens before the event at `b` (strict).
  bool reaches(Pos a, Pos b) const {
    if (a == 0 || b == 0 || a > n_ || b > n_) return false;
    std::size_t col = b - 1;
    return (row(a)[col / 64] >> (col % 64)) & 1u;
  }

  bool concurrent(Pos a, Pos b) const { return a != b && !reaches(a, b) && !reaches(b, a); }

 private:
  friend HbRelation compute_hb(const Trace& t);

  std::uint64_t* row(Pos a) { return bits_.data() + (a - 1) * words_; }
  const std::uint64_t* row(Pos a) const { return bits_.data() + (a - 1) * words_; }
  void set(Pos a, Pos b) {
    std::size_t col = b - 1;
    row(a)[col / 64] |= std::uint64_t{1} << (col % 64);
  }
  void absorb(Pos a, Pos b) {
    std::uint64_t* dst = row(a);
    const std::uint64_t* src = row(b);
    for (std::size_t w = 0; w < words_; ++w) dst[w] |= src[w];
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Base edges (program order, write-read dependency, release-acquire
/// dependency, fork order, join order) closed under transitivity. Every base
/// edge points forward in the trace, so the closure is a single backward
/// sweep.
inline HbRelation compute_hb(const Trace& t) {
  const std::size_t n = t.size();
  std::vector<std::vector<Pos>> succ(n + 1);
  auto events = t.events();

  for (Pos a = 1; a <= n; ++a) {
    const Event& e = events[a - 1];
    // PO: the next event of the same thread; later ones follow by transitivity.
    for (Pos b = a + 1; b <= n; ++b)
      if (events[b - 1].tid == e.tid) {
        succ[a].push_back(b);
        break;
      }
    // WRD: every later read of the variable up to the next write of it.
    if (e.op == Op::Write) {
      for (Pos b = a + 1; b <= n; ++b) {
        const Event& f = events[b - 1];
        if (f.target != e.target || !is_access(f.op)) continue;
        if (f.op == Op::Write) break;
        succ[a].push_back(b);
      }
    }
    // RAD: the first acquire of the mutex by another thread; acquires by the
    // releasing thread itself do not cut the dependency.
    if (e.op == Op::Release) {
      for (Pos b = a + 1; b <= n; ++b) {
        const Event& f = events[b - 1];
        if (f.op == Op::Acquire && f.target == e.target && f.tid != e.tid) {
          succ[a].push_back(b);
          break;
        }
      }
    }
    // FO / JO.
    if (e.op == Op::Fork || e.op == Op::Join) {
      ThreadId child = *detail::parse_uint(e.target);
      for (Pos b = 1; b <= n; ++b) {
        if (events[b - 1].tid != child) continue;
        if (e.op == Op::Fork && b > a) succ[a].push_back(b);
        if (e.op == Op::Join && b < a) succ[b].push_back(a);
      }
      // The child lives between its fork and its join even when it records
      // no events.
      if (e.op == Op::Fork)
        for (Pos b = a + 1; b <= n; ++b)
          if (events[b - 1].op == Op::Join && events[b - 1].target == e.target) {
            succ[a].push_back(b);
            break;
          }
    }
  }

  HbRelation hb(n);
  for (Pos a = static_cast<Pos>(n); a >= 1; --a) {
    for (Pos b : succ[a]) {
      hb.set(a, b);
      hb.absorb(a, b);
    }
  }
  return hb;
}

/// All position-ordered pairs of concurrent accesses to `variable`, reads
/// included, sorted.
inline std::vector<std::pair<Pos, Pos>> all_concurrent(const Trace& t, const HbRelation& hb, Slot variable) {
  std::vector<Pos> accesses;
  for (const Event& e : t.events())
    if (is_access(e.op) && t.object_slot(e.pos) == variable) accesses.push_back(e.pos);
  std::vector<std::pair<Pos, Pos>> out;
  for (std::size_t i = 0; i < accesses.size(); ++i)
    for (std::size_t j = i + 1; j < accesses.size(); ++j)
      if (hb.concurrent(accesses[i], accesses[j])) out.emplace_back(accesses[i], accesses[j]);
  return out;
}

/// Every data race pair of the trace, sorted.
///
/// Concurrent pairs with at least one write, plus write-read dependency
/// pairs: write e happens before read f, no event lies strictly between them
/// in happens-before, and they belong to different threads.
inline std::vector<RacePair> race_set(const Trace& t, const HbRelation& hb) {
  auto events = t.events();
  const Pos n = static_cast<Pos>(t.size());
  std::vector<RacePair> out;
  for (Pos a = 1; a <= n; ++a) {
    const Event& e = events[a - 1];
    if (!is_access(e.op)) continue;
    for (Pos b = a + 1; b <= n; ++b) {
      const Event& f = events[b - 1];
      if (!is_access(f.op) || f.target != e.target) continue;
      if (e.op == Op::Read && f.op == Op::Read) continue;
      Slot var = t.object_slot(a);
      if (hb.concurrent(a, b)) {
        out.push_back({a, b, var, concurrent_kind(e.op, f.op)});
        continue;
      }
      if (e.op == Op::Write && f.op == Op::Read && e.tid != f.tid && hb.reaches(a, b)) {
        bool between = false;
        for (Pos c = a + 1; c < b && !between; ++c) between = hb.reaches(a, c) && hb.reaches(c, b);
        if (!between) out.push_back({a, b, var, RaceKind::WriteReadDep});
      }
    }
  }
  return out;
}

}  // namespace racepair
