#pragma once

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "racepair/trace.hpp"

namespace racepair {

using Stamp = std::uint32_t;

/// Per-thread logical time stamps indexed by thread slot.
///
/// Clocks grow on demand; a slot past the end reads as 0, so clocks of
/// different lengths compare as if zero-extended.
class VectorClock {
 public:
  VectorClock() = default;
  VectorClock(std::initializer_list<Stamp> stamps) : stamps_(stamps) {}
  explicit VectorClock(std::vector<Stamp> stamps) : stamps_(std::move(stamps)) {}

  /// Clock of a thread that starts without a parent: own slot 1, rest 0.
  static VectorClock initial(Slot self) {
    VectorClock v;
    v.set(self, 1);
    return v;
  }

  Stamp operator[](Slot i) const { return i < stamps_.size() ? stamps_[i] : 0; }

  void set(Slot i, Stamp s) {
    if (i >= stamps_.size()) stamps_.resize(i + 1, 0);
    stamps_[i] = s;
  }

  void increment(Slot i) { set(i, (*this)[i] + 1); }

  void join_with(const VectorClock& other) {
    if (other.stamps_.size() > stamps_.size()) stamps_.resize(other.stamps_.size(), 0);
    for (std::size_t i = 0; i < other.stamps_.size(); ++i) stamps_[i] = std::max(stamps_[i], other.stamps_[i]);
  }

  std::size_t size() const { return stamps_.size(); }
  const std::vector<Stamp>& stamps() const { return stamps_; }

  friend bool operator==(const VectorClock& a, const VectorClock& b) {
    std::size_t n = std::max(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
      if (a[static_cast<Slot>(i)] != b[static_cast<Slot>(i)]) return false;
    return true;
  }

  friend std::ostream& operator<<(std::ostream& os, const VectorClock& v) {
    os << '[';
    for (std::size_t i = 0; i < v.stamps_.size(); ++i) os << (i ? "," : "") << v.stamps_[i];
    return os << ']';
  }

 private:
  std::vector<Stamp> stamps_;
};

inline VectorClock join(VectorClock a, const VectorClock& b) {
  a.join_with(b);
  return a;
}

/// Pointwise a <= b.
inline bool leq(const VectorClock& a, const VectorClock& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[static_cast<Slot>(i)] > b[static_cast<Slot>(i)]) return false;
  return true;
}

inline VectorClock incremented(VectorClock v, Slot i) {
  v.increment(i);
  return v;
}

enum class Access : std::uint8_t { Read, Write };

/// Compact identity of one read/write event: thread slot plus the thread's
/// own stamp at the event. Position and access kind ride along so that
/// post-processing never needs to look the event up.
struct Epoch {
  Slot thread = 0;
  Stamp stamp = 0;
  Pos pos = 0;
  Access kind = Access::Read;

  bool is_write() const { return kind == Access::Write; }
  friend bool operator==(const Epoch&, const Epoch&) = default;
};

/// `tid#stamp`, using the trace's thread ids.
inline std::string to_string(const Epoch& e, const Trace& t) {
  return std::to_string(t.thread_id(e.thread)) + "#" + std::to_string(e.stamp);
}

}  // namespace racepair
