#pragma once

// The single-pass schedulable happens-before detector: flags events that
// take part in some race, optionally reports write-read dependency race
// pairs, and optionally records every access's clock for the pairwise
// post-processing that recovers all concurrent pairs.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "racepair/race.hpp"
#include "racepair/trace.hpp"
#include "racepair/vclock.hpp"

namespace racepair {

struct ShbOptions {
  bool wrd = false;            // flag+wrd: stamp test against the last write
  bool record_clocks = false;  // keep each access's clock for shball_post
};

inline constexpr ShbOptions kShbFlag{};
inline constexpr ShbOptions kShbFlagWrd{.wrd = true};
inline constexpr ShbOptions kShbRecordAll{.record_clocks = true};

enum FlagBits : std::uint8_t {
  kRacesWithWrite = 1,  // W(x) check failed
  kRacesWithRead = 2,   // R(x) check failed (writes only)
  kRacesWrd = 4,        // write-read dependency race on a read
};

struct Flag {
  Pos pos = 0;
  std::uint8_t bits = 0;
};

/// "w", "r", "rw", "wrd" and combinations like "w+wrd".
inline std::string flag_label(std::uint8_t bits) {
  std::string s;
  if (bits & kRacesWithRead) s += "r";
  if (bits & kRacesWithWrite) s += "w";
  if (bits & kRacesWrd) s += s.empty() ? "wrd" : "+wrd";
  return s;
}

namespace detail {

/// Last write on a variable: its clock, thread slot and position.
struct LastWrite {
  VectorClock clock;
  std::optional<Slot> thread;
  Pos pos = 0;

  /// True iff a read by a thread with clock `th` (before joining `clock`)
  /// does not yet know the last write.
  bool unseen_by(const VectorClock& th) const { return thread && !(clock[*thread] <= th[*thread]); }
};

/// Thread clocks with the acquire/release/fork/join rules shared by every
/// engine.
class ThreadClocks {
 public:
  explicit ThreadClocks(const Trace& t) {
    clocks_.reserve(t.thread_count());
    for (Slot s = 0; s < t.thread_count(); ++s) clocks_.push_back(VectorClock::initial(s));
    releases_.resize(t.mutex_count());
  }

  VectorClock& of(Slot thread) { return clocks_.at(thread); }

  /// Applies a synchronization event. Returns false for reads and writes.
  bool sync(const Trace& t, const Event& e) {
    Slot self = t.thread_slot(e.pos);
    Slot obj = t.object_slot(e.pos);
    switch (e.op) {
      case Op::Acquire: clocks_[self].join_with(releases_[obj]); return true;
      case Op::Release:
        releases_[obj] = clocks_[self];
        clocks_[self].increment(self);
        return true;
      case Op::Fork:
        clocks_[obj] = clocks_[self];
        clocks_[obj].set(obj, 1);
        clocks_[self].increment(self);
        return true;
      case Op::Join: clocks_[self].join_with(clocks_[obj]); return true;
      case Op::Read:
      case Op::Write: return false;
    }
    return false;
  }

  std::size_t clock_count() const { return clocks_.size() + releases_.size(); }

 private:
  std::vector<VectorClock> clocks_;
  std::vector<VectorClock> releases_;
};

}  // namespace detail

struct ShbState {
  std::vector<VectorClock> writes;  // W(x)
  std::vector<VectorClock> reads;   // R(x)
  std::vector<detail::LastWrite> last_write;
  // Indexed by position; empty unless clocks were recorded and the event is an access.
  std::vector<VectorClock> clocks;
  std::vector<Flag> flags;
  std::vector<RacePair> wrd_pairs;
  bool recorded = false;
  // Number of vector clocks held by the streaming state (threads, releases,
  // W, R, LW). Independent of trace length.
  std::size_t streaming_clocks = 0;
};

inline ShbState shb_run(const Trace& t, ShbOptions opts = kShbFlag) {
  ShbState st;
  detail::ThreadClocks th(t);
  st.writes.resize(t.variable_count());
  st.reads.resize(t.variable_count());
  st.last_write.resize(t.variable_count());
  st.recorded = opts.record_clocks;
  if (opts.record_clocks) st.clocks.resize(t.size() + 1);

  for (const Event& e : t.events()) {
    if (th.sync(t, e)) continue;
    Slot self = t.thread_slot(e.pos);
    Slot x = t.object_slot(e.pos);
    VectorClock& clock = th.of(self);
    std::uint8_t bits = 0;

    if (e.op == Op::Write) {
      if (opts.record_clocks) st.clocks[e.pos] = clock;
      if (!leq(st.writes[x], clock)) bits |= kRacesWithWrite;
      if (!leq(st.reads[x], clock)) bits |= kRacesWithRead;
      st.last_write[x] = {clock, self, e.pos};
      st.writes[x].set(self, clock[self]);
    } else {
      if (!leq(st.writes[x], clock)) bits |= kRacesWithWrite;
      // The dependency check must see the clock before it absorbs LW(x).
      if (opts.wrd && st.last_write[x].unseen_by(clock)) {
        bits |= kRacesWrd;
        st.wrd_pairs.push_back({st.last_write[x].pos, e.pos, x, RaceKind::WriteReadDep});
      }
      clock.join_with(st.last_write[x].clock);
      if (opts.record_clocks) st.clocks[e.pos] = clock;
      st.reads[x].set(self, clock[self]);
    }
    clock.increment(self);
    if (bits) st.flags.push_back({e.pos, bits});
  }
  st.streaming_clocks = th.clock_count() + st.writes.size() + st.reads.size() + st.last_write.size();
  return st;
}

/// Pairs every flagged event with each earlier access to the same variable
/// whose recorded clock is not below its own, at least one of the two being
/// a write. Yields exactly the concurrent race pairs.
inline std::vector<RacePair> shball_post(const ShbState& st, const Trace& t) {
  if (!st.recorded) throw std::logic_error("shball_post needs a run that recorded clocks");
  std::vector<std::vector<Pos>> seen(t.variable_count());
  std::vector<std::uint8_t> flagged(t.size() + 1, 0);
  for (const Flag& f : st.flags) flagged[f.pos] = 1;

  std::vector<RacePair> out;
  for (const Event& f : t.events()) {
    if (!is_access(f.op)) continue;
    Slot x = t.object_slot(f.pos);
    if (flagged[f.pos]) {
      const VectorClock& vf = st.clocks[f.pos];
      for (Pos p : seen[x]) {
        const Event& e = t.at(p);
        if (e.op == Op::Read && f.op == Op::Read) continue;
        if (!leq(st.clocks[p], vf)) out.push_back({p, f.pos, x, concurrent_kind(e.op, f.op)});
      }
    }
    seen[x].push_back(f.pos);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace racepair
