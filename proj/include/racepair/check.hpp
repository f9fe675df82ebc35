#pragma once

// Differential checking of every engine against the happens-before oracle on
// a single trace, plus greedy shrinking of failing traces.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "racepair/hb_oracle.hpp"
#include "racepair/lockset.hpp"
#include "racepair/postprocess.hpp"
#include "racepair/race.hpp"
#include "racepair/report.hpp"
#include "racepair/shb.hpp"
#include "racepair/shbee.hpp"
#include "racepair/trace.hpp"

namespace racepair {

struct CheckFailure {
  std::string criterion;  // "2a".."2d", "3", "5"
  std::string what;
};

struct CheckOptions {
  // Drop one post-processed pair before comparing, to prove the harness
  // notices.
  bool corrupt = false;
};

namespace detail {

inline std::string describe(const std::vector<RacePair>& v) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < v.size(); ++i)
    out << (i ? " " : "") << '(' << v[i].first << ',' << v[i].second << ' ' << kind_name(v[i].kind) << ')';
  out << '}';
  return out.str();
}

inline std::string describe(const std::vector<std::pair<Pos, Pos>>& v) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << '(' << v[i].first << ',' << v[i].second << ')';
  out << '}';
  return out.str();
}

inline std::vector<std::pair<Pos, Pos>> positions(const std::vector<EpochPair>& pairs) {
  std::vector<std::pair<Pos, Pos>> out;
  for (const EpochPair& p : pairs) out.emplace_back(p.first.pos, p.second.pos);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

inline std::vector<CheckFailure> check_trace(const Trace& t, const CheckOptions& opts = {}) {
  std::vector<CheckFailure> failures;
  auto fail = [&](std::string criterion, std::string what) { failures.push_back({std::move(criterion), std::move(what)}); };

  const HbRelation hb = compute_hb(t);
  const std::vector<RacePair> oracle = race_set(t, hb);
  std::vector<RacePair> oracle_wrd, oracle_conc;
  for (const RacePair& p : oracle) (p.kind == RaceKind::WriteReadDep ? oracle_wrd : oracle_conc).push_back(p);
  const std::size_t k = t.thread_count();
  const std::size_t n = t.size();

  std::vector<RacePair> assembled[2];
  for (int mode = 0; mode < 2; ++mode) {
    const bool optimized = mode == 1;
    const std::string tag = optimized ? "optimized" : "unoptimized";
    bool rw_reported = false;
    auto observe = [&](const ShbeeState& st, const Event& e) {
      if (rw_reported) return;
      const auto& rw = st.vars[t.object_slot(e.pos)].recent;
      if (rw.size() > (optimized ? 2 * k : k)) {
        fail("3", tag + " recent set of size " + std::to_string(rw.size()) + " after position " + std::to_string(e.pos));
        rw_reported = true;
      }
      if (optimized) return;
      for (std::size_t i = 0; i < rw.size() && !rw_reported; ++i)
        for (std::size_t j = i + 1; j < rw.size() && !rw_reported; ++j)
          if (!hb.concurrent(rw[i].pos, rw[j].pos)) {
            fail("3", "recent set holds ordered " + std::to_string(rw[i].pos) + "," + std::to_string(rw[j].pos) +
                          " after position " + std::to_string(e.pos));
            rw_reported = true;
          }
    };
    ShbeeState st = shbee_run(t, {.optimized = optimized}, observe);

    std::vector<AccSet> acc(t.variable_count());
    for (Slot x = 0; x < t.variable_count(); ++x) {
      const auto& conc = st.vars[x].conc;
      std::set<std::pair<Pos, Pos>> in_conc;
      for (const EpochPair& p : conc) {
        in_conc.emplace(p.first.pos, p.second.pos);
        if (p.first.pos >= p.second.pos) fail("3", tag + " phase-1 pair out of order");
        if (!hb.concurrent(p.first.pos, p.second.pos))
          fail("3", tag + " phase-1 pair (" + std::to_string(p.first.pos) + "," + std::to_string(p.second.pos) +
                        ") is ordered");
        if (optimized && !p.first.is_write() && !p.second.is_write())
          fail("3", "optimized phase-1 read-read pair (" + std::to_string(p.first.pos) + "," +
                        std::to_string(p.second.pos) + ")");
      }
      for (const EpochPair& edge : st.edges(x, t))
        if (!hb.reaches(edge.first.pos, edge.second.pos))
          fail("3", tag + " unsound edge " + std::to_string(edge.first.pos) + "<" + std::to_string(edge.second.pos));

      const auto all = all_concurrent(t, hb, x);
      if (!optimized) {
        // A concurrent pair with no concurrent partner of f in between must
        // be found in phase 1.
        for (const auto& [e, f] : all) {
          bool other = false;
          for (Pos g = e + 1; g < f && !other; ++g)
            other = is_access(t.at(g).op) && t.object_slot(g) == x && hb.concurrent(g, f);
          if (!other && !in_conc.contains({e, f}))
            fail("3", "phase 1 missed (" + std::to_string(e) + "," + std::to_string(f) +
                          ") with no concurrent access in between");
        }
      }

      AccSet expanded = expand(conc, st.preds);
      if (expanded.enqueued > n * n) fail("3", tag + " worklist exceeded n^2 insertions");
      std::set<std::pair<Pos, Pos>> reached;
      for (const EpochPair& p : expanded.pairs) reached.emplace(p.first.pos, p.second.pos);
      for (const auto& p : all)
        if ((!optimized || t.at(p.first).op == Op::Write || t.at(p.second).op == Op::Write) && !reached.contains(p))
          fail("2a", tag + " expansion misses (" + std::to_string(p.first) + "," + std::to_string(p.second) + ")");

      acc[x] = eliminate(expanded, st.clocks);
      if (detail::positions(post_process(st, x).pairs) != detail::positions(acc[x].pairs))
        fail("2a", tag + " pruned post-processing differs from expand+eliminate");
      if (opts.corrupt && !optimized && !acc[x].pairs.empty()) acc[x].pairs.pop_back();
      if (!optimized) {
        auto got = detail::positions(acc[x].pairs);
        if (got != all)
          fail("2a", "variable " + t.variable_name(x) + ": engine " + detail::describe(got) + " oracle " +
                         detail::describe(all));
      }
    }
    std::vector<RacePair> wrd = st.wrd_pairs;
    std::sort(wrd.begin(), wrd.end());
    if (wrd != oracle_wrd)
      fail("2b", tag + " dependency pairs " + detail::describe(wrd) + " oracle " + detail::describe(oracle_wrd));
    assembled[mode] = assemble_races(t, acc, st.wrd_pairs);
    if (assembled[mode] != oracle)
      fail("2b", tag + " races " + detail::describe(assembled[mode]) + " oracle " + detail::describe(oracle));
  }
  if (assembled[0] != assembled[1]) fail("2b", "optimized and unoptimized results differ");

  const ShbState all = shb_run(t, kShbRecordAll);
  const auto post = shball_post(all, t);
  if (post != oracle_conc)
    fail("2c", "clock post-processing " + detail::describe(post) + " oracle " + detail::describe(oracle_conc));

  std::set<Pos> expected_flags, wrd_reads;
  for (const RacePair& p : oracle_conc) expected_flags.insert(p.second);
  for (const RacePair& p : oracle_wrd) wrd_reads.insert(p.second);
  auto flagged = [](const ShbState& s) {
    std::set<Pos> out;
    for (const Flag& f : s.flags) out.insert(f.pos);
    return out;
  };
  const ShbState plain = shb_run(t, kShbFlag);
  const ShbState with_wrd = shb_run(t, kShbFlagWrd);
  std::set<Pos> expected_all = expected_flags;
  expected_all.insert(wrd_reads.begin(), wrd_reads.end());
  if (flagged(plain) != expected_all) fail("2d", "flagged events differ from oracle race partners");
  if (flagged(with_wrd) != expected_all) fail("2d", "flagged events (dependency mode) differ from oracle");
  std::set<Pos> wrd_flagged;
  for (const Flag& f : with_wrd.flags)
    if (f.bits & kRacesWrd) wrd_flagged.insert(f.pos);
  std::vector<RacePair> shb_wrd = with_wrd.wrd_pairs;
  std::sort(shb_wrd.begin(), shb_wrd.end());
  if (wrd_flagged != wrd_reads || shb_wrd != oracle_wrd)
    fail("2d", "dependency flags " + detail::describe(shb_wrd) + " oracle " + detail::describe(oracle_wrd));

  const LocksetRecord locks = compute_locksets(t);
  for (const RacePair& p : assembled[0]) {
    if (intersects(locks.of(p.first), locks.of(p.second)))
      fail("3", "race (" + std::to_string(p.first) + "," + std::to_string(p.second) + ") shares a mutex");
  }
  return failures;
}

/// Greedily deletes single events, then pairs of events, while the result
/// stays well-formed and `still_fails` holds. Returns a local minimum.
inline Trace minimize(const Trace& t, const std::function<bool(const Trace&)>& still_fails) {
  std::vector<Event> cur(t.events().begin(), t.events().end());
  auto attempt = [&](std::vector<Event> cand) -> bool {
    try {
      Trace tr(std::move(cand));
      validate_trace(tr);
      if (!still_fails(tr)) return false;
      cur.assign(tr.events().begin(), tr.events().end());
      return true;
    } catch (const ValidationError&) {
      return false;
    }
  };
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t i = 0; i < cur.size() && !progress; ++i) {
      auto cand = cur;
      cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
      progress = attempt(std::move(cand));
    }
    for (std::size_t i = 0; i < cur.size() && !progress; ++i) {
      for (std::size_t j = i + 1; j < cur.size() && !progress; ++j) {
        auto cand = cur;
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(j));
        cand.erase(cand.begin() + static_cast<std::ptrdiff_t>(i));
        progress = attempt(std::move(cand));
      }
    }
  }
  return Trace(std::move(cur));
}

}  // namespace racepair
