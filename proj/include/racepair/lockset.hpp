#pragma once

// Locksets as a diagnostic on reported races: which side of a pair runs
// without holding any mutex.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "racepair/race.hpp"
#include "racepair/trace.hpp"

namespace racepair {

using Lockset = std::vector<Slot>;  // sorted mutex slots

struct LocksetRecord {
  // Indexed by position; only meaningful for reads and writes.
  std::vector<Lockset> at;

  const Lockset& of(Pos pos) const { return at.at(pos); }
};

inline LocksetRecord compute_locksets(const Trace& t) {
  LocksetRecord rec;
  rec.at.resize(t.size() + 1);
  std::vector<Lockset> held(t.thread_count());
  for (const Event& e : t.events()) {
    Lockset& mine = held[t.thread_slot(e.pos)];
    Slot obj = t.object_slot(e.pos);
    switch (e.op) {
      case Op::Acquire: mine.insert(std::lower_bound(mine.begin(), mine.end(), obj), obj); break;
      case Op::Release: std::erase(mine, obj); break;
      case Op::Read:
      case Op::Write: rec.at[e.pos] = mine; break;
      case Op::Fork:
      case Op::Join: break;
    }
  }
  return rec;
}

enum class LocksetClass : std::uint8_t {
  C1,           // first unprotected, second protected
  C2,           // first protected, second unprotected
  C3,           // both protected by disjoint locksets
  Unprotected,  // neither protected
};

inline std::string_view class_name(LocksetClass c) {
  switch (c) {
    case LocksetClass::C1: return "C1";
    case LocksetClass::C2: return "C2";
    case LocksetClass::C3: return "C3";
    case LocksetClass::Unprotected: return "unprotected";
  }
  return "?";
}

inline bool intersects(const Lockset& a, const Lockset& b) {
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

/// Throws std::logic_error when the two locksets share a mutex: no such pair
/// can be a race.
inline LocksetClass classify(const RacePair& pair, const LocksetRecord& rec) {
  const Lockset& a = rec.of(pair.first);
  const Lockset& b = rec.of(pair.second);
  if (intersects(a, b))
    throw std::logic_error("race pair " + std::to_string(pair.first) + "," + std::to_string(pair.second) +
                           " shares a mutex");
  if (a.empty() && b.empty()) return LocksetClass::Unprotected;
  if (a.empty()) return LocksetClass::C1;
  if (b.empty()) return LocksetClass::C2;
  return LocksetClass::C3;
}

}  // namespace racepair
