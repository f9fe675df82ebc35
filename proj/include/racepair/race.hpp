#pragma once

#include <compare>
#include <cstdint>
#include <string_view>

#include "racepair/trace.hpp"

namespace racepair {

enum class RaceKind : std::uint8_t {
  WriteWrite,  // two concurrent writes
  ReadWrite,   // concurrent write and read, in either trace order
  WriteReadDep // read observes a write of another thread with nothing in between
};

inline std::string_view kind_name(RaceKind k) {
  switch (k) {
    case RaceKind::WriteWrite: return "WW";
    case RaceKind::ReadWrite: return "WR";
    case RaceKind::WriteReadDep: return "WRD";
  }
  return "?";
}

/// A conflicting pair of accesses to one variable, first.pos < second.pos.
struct RacePair {
  Pos first = 0;
  Pos second = 0;
  Slot variable = 0;
  RaceKind kind = RaceKind::WriteWrite;

  friend auto operator<=>(const RacePair&, const RacePair&) = default;
};

inline RaceKind concurrent_kind(Op a, Op b) {
  return (a == Op::Write && b == Op::Write) ? RaceKind::WriteWrite : RaceKind::ReadWrite;
}

}  // namespace racepair
