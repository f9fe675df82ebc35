// racepair: predict all data race pairs in recorded traces.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "racepair/check.hpp"
#include "racepair/hb_oracle.hpp"
#include "racepair/report.hpp"
#include "racepair/trace.hpp"
#include "racepair/trace_tools.hpp"

namespace {

using namespace racepair;

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kBadInput = 2;
constexpr int kBadConfig = 3;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Trace load(const std::string& path, bool repair) {
  Trace t;
  if (path == "-") {
    t = parse_trace(std::cin);
  } else {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    t = parse_trace(in);
  }
  return validate_trace(t, repair);
}

struct AnalyzeArgs {
  std::string trace = "-";
  std::string algo = "shbee";
  std::string format = "text";
  std::string dedup = "locations";
  bool optimize = false;
  bool post = true;
  bool wrd = false;
  bool lockset = false;
  bool lockset_summary = false;
  bool repair = false;
};

int run_analyze(const AnalyzeArgs& a) {
  static const std::map<std::string, Algo> algos{{"shb", Algo::Shb}, {"shbee", Algo::Shbee}, {"shball", Algo::ShbAll}};
  AnalysisOptions opts;
  opts.algo = algos.at(a.algo);
  opts.optimize = a.optimize;
  opts.post = a.post;
  opts.wrd = a.wrd;
  opts.lockset = a.lockset || a.lockset_summary;
  opts.dedup = a.dedup == "events" ? Dedup::Events : Dedup::Locations;

  Trace t = load(a.trace, a.repair);
  RaceReport report = analyze(t, opts);
  if (a.format == "json") std::cout << to_json(report).dump(2) << '\n';
  else write_text(std::cout, report);
  if (a.lockset_summary) write_lockset_summary(std::cout, summarize_locksets(report));
  write_stats(std::cerr, report);
  return kOk;
}

struct OracleArgs {
  std::string trace = "-";
  std::string format = "text";
  bool repair = false;
};

int run_oracle(const OracleArgs& a) {
  Trace t = load(a.trace, a.repair);
  HbRelation hb = compute_hb(t);
  auto races = race_set(t, hb);
  if (a.format == "json") {
    nlohmann::json out{{"races", nlohmann::json::array()}, {"concurrent", nlohmann::json::object()}};
    for (const RacePair& p : races)
      out["races"].push_back({{"variable", t.variable_name(p.variable)},
                              {"firstPos", p.first},
                              {"secondPos", p.second},
                              {"firstLoc", t.at(p.first).loc},
                              {"secondLoc", t.at(p.second).loc},
                              {"category", kind_name(p.kind)}});
    for (Slot x = 0; x < t.variable_count(); ++x) {
      auto& list = out["concurrent"][t.variable_name(x)] = nlohmann::json::array();
      for (const auto& [e, f] : all_concurrent(t, hb, x)) list.push_back({e, f});
    }
    std::cout << out.dump(2) << '\n';
    return kOk;
  }
  for (const RacePair& p : races)
    std::cout << t.variable_name(p.variable) << ' ' << t.at(p.first).loc << '@' << p.first << " <-> "
              << t.at(p.second).loc << '@' << p.second << " [" << kind_name(p.kind) << "]\n";
  for (Slot x = 0; x < t.variable_count(); ++x) {
    std::cout << "concurrent " << t.variable_name(x) << ':';
    for (const auto& [e, f] : all_concurrent(t, hb, x)) std::cout << " (" << e << ',' << f << ')';
    std::cout << '\n';
  }
  return kOk;
}

struct CheckArgs {
  std::uint64_t seeds = 1000;
  std::uint64_t first_seed = 1;
  std::uint32_t max_events = 20;
  bool corrupt = false;
};

int run_check(const CheckArgs& a) {
  if (a.max_events < 1) throw ConfigError("max-events must be at least 1");
  const CheckOptions opts{.corrupt = a.corrupt};
  for (std::uint64_t i = 0; i < a.seeds; ++i) {
    const std::uint64_t seed = a.first_seed + i;
    Trace t = generate(corpus_config(seed, a.max_events));
    auto failures = check_trace(t, opts);
    if (failures.empty()) continue;
    std::cout << "mismatch at seed " << seed << '\n';
    for (const CheckFailure& f : failures) std::cout << "  [" << f.criterion << "] " << f.what << '\n';
    Trace small = minimize(t, [&](const Trace& c) { return !check_trace(c, opts).empty(); });
    std::cout << "minimal failing trace (" << small.size() << " events):\n";
    render_trace(std::cout, small);
    return kMismatch;
  }
  std::cout << "ok: " << a.seeds << " traces\n";
  return kOk;
}

struct GenArgs {
  GenConfig cfg;
  std::string out = "-";
};

int run_gen(const GenArgs& a) {
  Trace t = generate(a.cfg);
  if (a.out == "-") {
    render_trace(std::cout, t);
  } else {
    std::ofstream out(a.out);
    if (!out) throw InputError("cannot write " + a.out);
    render_trace(out, t);
  }
  return kOk;
}

struct FilterArgs {
  std::string in;
  std::string out = "-";
};

int run_filter(const FilterArgs& a) {
  Trace t = filter_shared(load(a.in, false));
  if (a.out == "-") {
    render_trace(std::cout, t);
  } else {
    std::ofstream out(a.out);
    if (!out) throw InputError("cannot write " + a.out);
    render_trace(out, t);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicts all data race pairs in recorded concurrent traces."};
  app.require_subcommand(1);

  AnalyzeArgs analyze_args;
  auto* analyze_cmd = app.add_subcommand("analyze", "Report race pairs in a trace");
  analyze_cmd->add_option("--trace", analyze_args.trace, "CSV trace file, - for stdin");
  analyze_cmd->add_option("--algo", analyze_args.algo, "Analysis")->check(CLI::IsMember({"shb", "shbee", "shball"}));
  analyze_cmd->add_flag("--optimize", analyze_args.optimize, "Keep writes until superseded; skip read-read pairs");
  analyze_cmd->add_flag("--post,!--no-post", analyze_args.post, "Run post-processing (default on)");
  analyze_cmd->add_flag("--wrd", analyze_args.wrd, "shb: also flag write-read dependency races");
  analyze_cmd->add_flag("--lockset", analyze_args.lockset, "Classify each pair by locksets");
  analyze_cmd->add_flag("--lockset-summary", analyze_args.lockset_summary, "Print lockset class totals");
  analyze_cmd->add_option("--format", analyze_args.format)->check(CLI::IsMember({"text", "json"}));
  analyze_cmd->add_flag("--repair", analyze_args.repair, "Release locks still held at trace end");
  analyze_cmd->add_option("--dedup", analyze_args.dedup)->check(CLI::IsMember({"locations", "events"}));

  OracleArgs oracle_args;
  auto* oracle_cmd = app.add_subcommand("oracle", "Brute-force race set and concurrent pairs");
  oracle_cmd->add_option("--trace", oracle_args.trace, "CSV trace file, - for stdin");
  oracle_cmd->add_option("--format", oracle_args.format)->check(CLI::IsMember({"text", "json"}));
  oracle_cmd->add_flag("--repair", oracle_args.repair, "Release locks still held at trace end");

  CheckArgs check_args;
  auto* check_cmd = app.add_subcommand("check", "Compare all engines with the oracle on generated traces");
  check_cmd->add_option("--seeds", check_args.seeds, "Number of traces");
  check_cmd->add_option("--first-seed", check_args.first_seed);
  check_cmd->add_option("--max-events", check_args.max_events);
  check_cmd->add_flag("--corrupt", check_args.corrupt, "Drop one engine result (harness self-test)");

  GenArgs gen_args;
  GenConfig& g = gen_args.cfg;
  bool no_read_before_write = false;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a random well-formed trace");
  gen_cmd->add_option("--seed", g.seed);
  gen_cmd->add_option("--threads", g.threads);
  gen_cmd->add_option("--variables", g.variables);
  gen_cmd->add_option("--mutexes", g.mutexes);
  gen_cmd->add_option("--events", g.events);
  gen_cmd->add_flag("--fork-join", g.fork_join);
  gen_cmd->add_flag("--no-read-before-write", no_read_before_write, "Only read variables already written");
  gen_cmd->add_option("--w-read", g.weights.read);
  gen_cmd->add_option("--w-write", g.weights.write);
  gen_cmd->add_option("--w-acquire", g.weights.acquire);
  gen_cmd->add_option("--w-release", g.weights.release);
  gen_cmd->add_option("--w-fork", g.weights.fork);
  gen_cmd->add_option("--w-join", g.weights.join);
  gen_cmd->add_option("--out", gen_args.out);

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "Drop accesses to variables only one thread touches");
  filter_cmd->add_option("in", filter_args.in)->required();
  filter_cmd->add_option("out", filter_args.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }
  g.read_before_write = !no_read_before_write;

  try {
    if (*analyze_cmd) return run_analyze(analyze_args);
    if (*oracle_cmd) return run_oracle(oracle_args);
    if (*check_cmd) return run_check(check_args);
    if (*gen_cmd) return run_gen(gen_args);
    if (*filter_cmd) return run_filter(filter_args);
  } catch (const ParseError& e) {
    std::cerr << "parse error: line " << e.line() << ": " << e.what() << '\n';
    return kBadInput;
  } catch (const ValidationError& e) {
    std::cerr << "invalid trace: position " << e.pos() << ": " << e.what() << '\n';
    return kBadInput;
  } catch (const InputError& e) {
    std::cerr << e.what() << '\n';
    return kBadInput;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kBadConfig;
  }
  return kOk;
}
