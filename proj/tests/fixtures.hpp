#pragma once

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "racepair/race.hpp"
#include "racepair/shbee.hpp"
#include "racepair/trace.hpp"

namespace fixtures {

using racepair::Pos;

inline racepair::Trace sample(std::string_view name) {
  std::string path = std::string(RACEPAIR_SAMPLES_DIR) + "/" + std::string(name) + ".csv";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing sample " + path);
  return racepair::validate_trace(racepair::parse_trace(in));
}

inline racepair::Trace csv(std::string_view text) { return racepair::validate_trace(racepair::parse_trace(text)); }

using PosPairs = std::vector<std::pair<Pos, Pos>>;

inline PosPairs positions(const std::vector<racepair::EpochPair>& v) {
  PosPairs out;
  for (const auto& p : v) out.emplace_back(p.first.pos, p.second.pos);
  std::sort(out.begin(), out.end());
  return out;
}

inline PosPairs positions(const std::vector<racepair::RacePair>& v) {
  PosPairs out;
  for (const auto& p : v) out.emplace_back(p.first, p.second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fixtures
