#pragma once

// Runs an analysis over a trace and turns its output into a race report:
// normalized pairs with phase, category and optional lockset class,
// deduplicated by event or by source location.

#include <algorithm>
#include <chrono>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "racepair/lockset.hpp"
#include "racepair/postprocess.hpp"
#include "racepair/race.hpp"
#include "racepair/shb.hpp"
#include "racepair/shbee.hpp"
#include "racepair/trace.hpp"

namespace racepair {

/// Race pairs from eliminated per-variable candidate sets plus write-read
/// dependency pairs, read-read pairs dropped, sorted and unique.
inline std::vector<RacePair> assemble_races(const Trace& t, std::span<const AccSet> by_variable,
                                            std::span<const RacePair> wrd) {
  std::vector<RacePair> out(wrd.begin(), wrd.end());
  for (Slot x = 0; x < by_variable.size(); ++x) {
    for (const EpochPair& p : by_variable[x].pairs) {
      if (!p.first.is_write() && !p.second.is_write()) continue;
      out.push_back({p.first.pos, p.second.pos, x, concurrent_kind(t.at(p.first.pos).op, t.at(p.second.pos).op)});
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

enum class Algo { Shb, Shbee, ShbAll };
enum class Dedup { Locations, Events };

struct AnalysisOptions {
  Algo algo = Algo::Shbee;
  bool optimize = false;
  bool post = true;
  bool wrd = false;  // shb only: also run the write-read dependency check
  bool lockset = false;
  Dedup dedup = Dedup::Locations;
};

struct ReportedPair {
  Pos first_pos = 0;
  Pos second_pos = 0;
  std::string first_loc;
  std::string second_loc;
  std::string variable;
  RaceKind kind = RaceKind::WriteWrite;
  int phase = 1;
  std::optional<LocksetClass> lockset;
};

struct ReportedFlag {
  Pos pos = 0;
  std::string loc;
  std::string variable;
  std::string category;
};

struct ReportStats {
  std::size_t phase1 = 0;
  std::size_t phase2 = 0;
  std::size_t events = 0;
  std::size_t threads = 0;
  std::size_t variables = 0;
  double phase1_ms = 0;
  double phase2_ms = 0;
};

struct RaceReport {
  std::vector<ReportedPair> pairs;
  std::vector<ReportedFlag> flags;  // shb only
  ReportStats stats;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct PhasedPair {
  RacePair pair;
  int phase;
};

inline RaceReport build_report(const Trace& t, std::vector<PhasedPair> pairs, const AnalysisOptions& opts) {
  // Phase-1 instances first so a location pair seen in both phases counts
  // toward phase 1.
  std::stable_sort(pairs.begin(), pairs.end(), [](const PhasedPair& a, const PhasedPair& b) {
    return std::tie(a.phase, a.pair) < std::tie(b.phase, b.pair);
  });
  std::optional<LocksetRecord> locks;
  if (opts.lockset) locks = compute_locksets(t);

  RaceReport report;
  std::set<std::tuple<std::string, std::string, Slot, RaceKind>> seen_locs;
  std::set<RacePair> seen_events;
  for (const PhasedPair& pp : pairs) {
    const RacePair& p = pp.pair;
    const Event& e = t.at(p.first);
    const Event& f = t.at(p.second);
    if (opts.dedup == Dedup::Locations) {
      auto [lo, hi] = std::minmax(e.loc, f.loc);
      if (!seen_locs.emplace(lo, hi, p.variable, p.kind).second) continue;
    } else if (!seen_events.insert(p).second) {
      continue;
    }
    ReportedPair r{p.first, p.second, e.loc, f.loc, t.variable_name(p.variable), p.kind, pp.phase, std::nullopt};
    if (locks) r.lockset = classify(p, *locks);
    report.pairs.push_back(std::move(r));
    ++(pp.phase == 1 ? report.stats.phase1 : report.stats.phase2);
  }
  std::sort(report.pairs.begin(), report.pairs.end(), [](const ReportedPair& a, const ReportedPair& b) {
    return std::tie(a.first_pos, a.second_pos, a.kind) < std::tie(b.first_pos, b.second_pos, b.kind);
  });
  return report;
}

}  // namespace detail

inline RaceReport analyze(const Trace& t, const AnalysisOptions& opts = {}) {
  using detail::Clock;
  std::vector<detail::PhasedPair> pairs;
  RaceReport report;
  double phase1_ms = 0, phase2_ms = 0;

  switch (opts.algo) {
    case Algo::Shb: {
      auto start = Clock::now();
      ShbState st = shb_run(t, {.wrd = opts.wrd});
      phase1_ms = detail::ms_since(start);
      for (const RacePair& p : st.wrd_pairs) pairs.push_back({p, 1});
      report = detail::build_report(t, std::move(pairs), opts);
      std::set<std::pair<std::string, Slot>> seen;
      for (const Flag& f : st.flags) {
        const Event& e = t.at(f.pos);
        Slot x = t.object_slot(f.pos);
        if (opts.dedup == Dedup::Locations && !seen.emplace(e.loc, x).second) continue;
        report.flags.push_back({f.pos, e.loc, t.variable_name(x), flag_label(f.bits)});
      }
      break;
    }
    case Algo::Shbee: {
      auto start = Clock::now();
      ShbeeState st = shbee_run(t, {.optimized = opts.optimize, .keep_post_data = opts.post});
      phase1_ms = detail::ms_since(start);
      for (const RacePair& p : st.wrd_pairs) pairs.push_back({p, 1});
      std::unordered_set<std::uint64_t> phase1;
      for (Slot x = 0; x < st.vars.size(); ++x)
        for (const EpochPair& p : st.vars[x].conc) phase1.insert(detail::pair_key(p));
      std::vector<AccSet> acc(st.vars.size());
      if (opts.post) {
        start = Clock::now();
        for (Slot x = 0; x < st.vars.size(); ++x) acc[x] = post_process(st, x);
        phase2_ms = detail::ms_since(start);
      } else {
        for (Slot x = 0; x < st.vars.size(); ++x) acc[x].pairs = st.vars[x].conc;
      }
      for (const RacePair& p : assemble_races(t, acc, {})) {
        std::uint64_t key = (std::uint64_t{p.first} << 32) | p.second;
        pairs.push_back({p, phase1.contains(key) ? 1 : 2});
      }
      report = detail::build_report(t, std::move(pairs), opts);
      break;
    }
    case Algo::ShbAll: {
      auto start = Clock::now();
      ShbState st = shb_run(t, {.wrd = true, .record_clocks = true});
      phase1_ms = detail::ms_since(start);
      start = Clock::now();
      auto all = shball_post(st, t);
      phase2_ms = detail::ms_since(start);
      for (const RacePair& p : st.wrd_pairs) pairs.push_back({p, 1});
      for (const RacePair& p : all) pairs.push_back({p, 2});
      report = detail::build_report(t, std::move(pairs), opts);
      break;
    }
  }
  report.stats.events = t.size();
  report.stats.threads = t.thread_count();
  report.stats.variables = t.variable_count();
  report.stats.phase1_ms = phase1_ms;
  report.stats.phase2_ms = phase2_ms;
  return report;
}

// Output ---------------------------------------------------------------------

inline void write_text(std::ostream& out, const RaceReport& r) {
  for (const ReportedFlag& f : r.flags) out << f.variable << ' ' << f.loc << '@' << f.pos << " [" << f.category << "]\n";
  for (const ReportedPair& p : r.pairs) {
    out << p.variable << ' ' << p.first_loc << '@' << p.first_pos << " <-> " << p.second_loc << '@' << p.second_pos
        << " [" << kind_name(p.kind) << '/' << (p.lockset ? class_name(*p.lockset) : "-") << '/' << p.phase << "]\n";
  }
}

inline nlohmann::json to_json(const RaceReport& r) {
  auto out = nlohmann::json::array();
  for (const ReportedFlag& f : r.flags)
    out.push_back({{"variable", f.variable}, {"loc", f.loc}, {"pos", f.pos}, {"category", f.category}});
  for (const ReportedPair& p : r.pairs) {
    out.push_back({{"variable", p.variable},
                   {"firstLoc", p.first_loc},
                   {"secondLoc", p.second_loc},
                   {"firstPos", p.first_pos},
                   {"secondPos", p.second_pos},
                   {"category", kind_name(p.kind)},
                   {"locksetClass", p.lockset ? nlohmann::json(class_name(*p.lockset)) : nlohmann::json(nullptr)},
                   {"phase", p.phase}});
  }
  return out;
}

inline void write_stats(std::ostream& out, const RaceReport& r) {
  out << "races: " << r.stats.phase1 << '+' << r.stats.phase2;
  if (!r.flags.empty()) out << " (flagged: " << r.flags.size() << ')';
  out << "\nevents: " << r.stats.events << " threads: " << r.stats.threads << " variables: " << r.stats.variables
      << "\nphase1: " << r.stats.phase1_ms << " ms phase2: " << r.stats.phase2_ms << " ms\n";
}

struct LocksetSummary {
  std::size_t c1 = 0, c2 = 0, c3 = 0, unprotected = 0;
  std::size_t total() const { return c1 + c2 + c3 + unprotected; }
};

inline LocksetSummary summarize_locksets(const RaceReport& r) {
  LocksetSummary s;
  for (const ReportedPair& p : r.pairs) {
    if (!p.lockset) continue;
    switch (*p.lockset) {
      case LocksetClass::C1: ++s.c1; break;
      case LocksetClass::C2: ++s.c2; break;
      case LocksetClass::C3: ++s.c3; break;
      case LocksetClass::Unprotected: ++s.unprotected; break;
    }
  }
  return s;
}

inline void write_lockset_summary(std::ostream& out, const LocksetSummary& s) {
  out << "C1\tC2\tC3\tunprotected\t#race pairs\n"
      << s.c1 << '\t' << s.c2 << '\t' << s.c3 << '\t' << s.unprotected << '\t' << s.total() << '\n';
}

}  // namespace racepair
