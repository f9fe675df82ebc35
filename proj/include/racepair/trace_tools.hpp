#pragma once

// Seeded generation of well-formed traces, and the tracing-time filter that
// drops accesses to variables only one thread ever touches.

#include <algorithm>
#include <array>
#include <cstdint>
#include <list>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "racepair/trace.hpp"

namespace racepair {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OpWeights {
  double read = 4;
  double write = 4;
  double acquire = 1;
  double release = 1;
  double fork = 1;
  double join = 1;
};

struct GenConfig {
  std::uint64_t seed = 1;
  std::uint32_t threads = 2;
  std::uint32_t variables = 2;
  std::uint32_t mutexes = 1;
  std::uint32_t events = 20;
  OpWeights weights;
  // Thread 0 starts alone; every other thread must be forked first.
  bool fork_join = false;
  // When false a variable is only read after something wrote it.
  bool read_before_write = true;
};

namespace detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace detail

/// Builds a trace that passes strict validation. Each step picks a runnable
/// thread and then an enabled operation by weight; acquires are only enabled
/// for free mutexes and only while enough budget remains to release
/// everything held, which happens at the end in innermost-first order.
/// Equal configs give equal traces. Without variables the trace may end one
/// event short when no acquire/release pair fits the remaining budget.
inline Trace generate(const GenConfig& cfg) {
  const OpWeights& w = cfg.weights;
  if (cfg.events < 1) throw ConfigError("events must be at least 1");
  if (cfg.threads < 1) throw ConfigError("threads must be at least 1");
  if (w.read < 0 || w.write < 0 || w.acquire < 0 || w.release < 0 || w.fork < 0 || w.join < 0)
    throw ConfigError("op weights must be non-negative");
  if (w.read + w.write + w.acquire + w.release + w.fork + w.join <= 0) throw ConfigError("op weights are all zero");
  if (cfg.fork_join && cfg.threads < 2) throw ConfigError("fork/join needs at least 2 threads");
  if (cfg.variables == 0 && cfg.mutexes == 0 && !cfg.fork_join)
    throw ConfigError("no variables, mutexes or fork/join: nothing to generate");

  enum class Life { Unborn, Running, Joined };
  struct ThreadState {
    Life life = Life::Running;
    std::vector<std::uint32_t> held;
  };

  detail::Rng rng(cfg.seed);
  std::vector<ThreadState> threads(cfg.threads);
  if (cfg.fork_join)
    for (std::size_t i = 1; i < threads.size(); ++i) threads[i].life = Life::Unborn;
  std::vector<std::optional<std::uint32_t>> owner(cfg.mutexes);
  std::vector<bool> written(cfg.variables, false);
  std::size_t total_held = 0;
  std::vector<Event> events;

  auto emit = [&](std::uint32_t tid, Op op, std::string target) {
    Event e;
    e.tid = tid;
    e.op = op;
    e.target = std::move(target);
    events.push_back(std::move(e));
  };

  while (events.size() + total_held < cfg.events) {
    const std::size_t remaining = cfg.events - events.size();

    std::vector<std::uint32_t> runnable;
    for (std::uint32_t i = 0; i < threads.size(); ++i)
      if (threads[i].life == Life::Running) runnable.push_back(i);
    const std::uint32_t self = runnable[rng.below(runnable.size())];
    ThreadState& me = threads[self];

    std::vector<std::uint32_t> free_mutexes, unborn, joinable, readable;
    for (std::uint32_t m = 0; m < owner.size(); ++m)
      if (!owner[m]) free_mutexes.push_back(m);
    for (std::uint32_t i = 0; i < threads.size(); ++i) {
      if (i == self) continue;
      if (threads[i].life == Life::Unborn) unborn.push_back(i);
      if (threads[i].life == Life::Running && threads[i].held.empty()) joinable.push_back(i);
    }
    for (std::uint32_t v = 0; v < written.size(); ++v)
      if (cfg.read_before_write || written[v]) readable.push_back(v);

    std::array<double, 6> weight{
        readable.empty() ? 0.0 : w.read,
        cfg.variables == 0 ? 0.0 : w.write,
        (free_mutexes.empty() || remaining < total_held + 2) ? 0.0 : w.acquire,
        me.held.empty() ? 0.0 : w.release,
        (cfg.fork_join && !unborn.empty()) ? w.fork : 0.0,
        (cfg.fork_join && !joinable.empty()) ? w.join : 0.0,
    };
    double sum = 0;
    for (double x : weight) sum += x;
    std::size_t choice = 1;
    std::uint32_t actor = self;
    if (sum > 0) {
      double u = rng.unit() * sum;
      for (std::size_t k = 0; k < weight.size(); ++k) {
        if (weight[k] <= 0) continue;
        choice = k;
        if (u < weight[k]) break;
        u -= weight[k];
      }
    } else if (!me.held.empty()) {
      choice = 3;
    } else {
      // No enabled op has weight; only closing releases are left to do.
      auto holder = std::find_if(threads.begin(), threads.end(), [](const ThreadState& s) { return !s.held.empty(); });
      // Nothing fits in the remaining budget: end the trace early.
      if (holder == threads.end()) break;
      actor = static_cast<std::uint32_t>(holder - threads.begin());
      choice = 3;
    }
    ThreadState& doer = threads[actor];

    switch (choice) {
      case 0: {
        std::uint32_t v = readable[rng.below(readable.size())];
        emit(self, Op::Read, "v" + std::to_string(v));
        break;
      }
      case 1: {
        std::uint32_t v = static_cast<std::uint32_t>(rng.below(cfg.variables));
        written[v] = true;
        emit(self, Op::Write, "v" + std::to_string(v));
        break;
      }
      case 2: {
        std::uint32_t m = free_mutexes[rng.below(free_mutexes.size())];
        owner[m] = self;
        me.held.push_back(m);
        ++total_held;
        emit(self, Op::Acquire, "m" + std::to_string(m));
        break;
      }
      case 3: {
        std::size_t k = rng.below(doer.held.size());
        std::uint32_t m = doer.held[k];
        doer.held.erase(doer.held.begin() + static_cast<std::ptrdiff_t>(k));
        owner[m].reset();
        --total_held;
        emit(actor, Op::Release, "m" + std::to_string(m));
        break;
      }
      case 4: {
        std::uint32_t child = unborn[rng.below(unborn.size())];
        threads[child].life = Life::Running;
        emit(self, Op::Fork, std::to_string(child));
        break;
      }
      case 5: {
        std::uint32_t child = joinable[rng.below(joinable.size())];
        threads[child].life = Life::Joined;
        emit(self, Op::Join, std::to_string(child));
        break;
      }
    }
  }

  for (std::uint32_t i = 0; i < threads.size(); ++i) {
    auto& held = threads[i].held;
    for (auto it = held.rbegin(); it != held.rend(); ++it) emit(i, Op::Release, "m" + std::to_string(*it));
    held.clear();
  }
  return Trace(std::move(events));
}

/// Configuration of corpus trace number `seed`: up to 4 threads, 2
/// variables, 2 mutexes and `max_events` events, with fork/join on every
/// other seed.
inline GenConfig corpus_config(std::uint64_t seed, std::uint32_t max_events = 20) {
  detail::Rng rng(seed * 0x9E3779B97F4A7C15ull + 7);
  GenConfig cfg;
  cfg.seed = seed;
  cfg.fork_join = seed % 2 == 1;
  cfg.threads = static_cast<std::uint32_t>((cfg.fork_join ? 2 : 1) + rng.below(cfg.fork_join ? 3 : 4));
  cfg.variables = static_cast<std::uint32_t>(1 + rng.below(2));
  cfg.mutexes = static_cast<std::uint32_t>(rng.below(3));
  cfg.events = static_cast<std::uint32_t>(1 + rng.below(std::max<std::uint32_t>(max_events, 1)));
  cfg.read_before_write = rng.below(4) != 0;
  return cfg;
}

/// Keeps only accesses to variables touched by at least two threads.
///
/// Until a variable is shared, only its most recent access is buffered
/// (each new access by the same thread replaces it). On the first access by
/// a different thread the buffered access and the current one are emitted,
/// and from then on every access passes. Synchronization events always pass.
/// Output positions are fresh; locations carry over, so events without an
/// explicit location keep their original position as location. A buffered
/// access whose thread was joined in the meantime is placed right before
/// that join to keep the output well-formed.
inline Trace filter_shared(const Trace& t) {
  struct VarState {
    std::optional<Event> buffered;
    bool shared = false;
  };
  std::unordered_map<std::string, VarState> vars;
  std::list<Event> out;
  std::unordered_map<ThreadId, std::list<Event>::iterator> join_of;

  for (const Event& e : t.events()) {
    Event copy = e;
    copy.pos = 0;
    if (!is_access(e.op)) {
      out.push_back(copy);
      if (e.op == Op::Join) join_of[*detail::parse_uint(e.target)] = std::prev(out.end());
      continue;
    }
    VarState& v = vars[e.target];
    if (v.shared) {
      out.push_back(copy);
    } else if (!v.buffered || v.buffered->tid == e.tid) {
      v.buffered = copy;
    } else {
      auto joined = join_of.find(v.buffered->tid);
      if (joined != join_of.end()) out.insert(joined->second, *v.buffered);
      else out.push_back(*v.buffered);
      out.push_back(copy);
      v.buffered.reset();
      v.shared = true;
    }
  }
  return Trace(std::vector<Event>(out.begin(), out.end()));
}

}  // namespace racepair
