#pragma once

// Events, traces, the CSV trace format and well-formedness checking.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace racepair {

using ThreadId = std::uint64_t;
// 1-based trace position.
using Pos = std::uint32_t;
// Dense index assigned to a thread, variable or mutex on first appearance.
using Slot = std::uint32_t;

enum class Op : std::uint8_t { Read, Write, Acquire, Release, Fork, Join };

inline bool is_access(Op op) { return op == Op::Read || op == Op::Write; }

inline std::string_view op_code(Op op) {
  switch (op) {
    case Op::Read: return "rd";
    case Op::Write: return "wr";
    case Op::Acquire: return "acq";
    case Op::Release: return "rel";
    case Op::Fork: return "fork";
    case Op::Join: return "join";
  }
  return "?";
}

inline std::optional<Op> parse_op_code(std::string_view s) {
  if (s == "rd") return Op::Read;
  if (s == "wr") return Op::Write;
  if (s == "acq") return Op::Acquire;
  if (s == "rel") return Op::Release;
  if (s == "fork") return Op::Fork;
  if (s == "join") return Op::Join;
  return std::nullopt;
}

struct Event {
  Pos pos = 0;
  ThreadId tid = 0;
  Op op = Op::Read;
  // Variable for rd/wr, mutex for acq/rel, decimal thread id for fork/join.
  std::string target;
  std::string loc;

  friend bool operator==(const Event&, const Event&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(Pos pos, const std::string& what)
      : std::runtime_error("position " + std::to_string(pos) + ": " + what), pos_(pos) {}
  Pos pos() const { return pos_; }

 private:
  Pos pos_;
};

namespace detail {

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

class Interner {
 public:
  Slot intern(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, static_cast<Slot>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }
  std::optional<Slot> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::unordered_map<std::string, Slot> index_;
  std::vector<std::string> names_;
};

}  // namespace detail

/// An immutable sequence of events with positions 1..n.
///
/// Construction assigns positions from sequence order, fills in default
/// locations and interns threads, variables and mutexes into dense slots in
/// order of first appearance. A thread's slot is assigned the first time it
/// shows up either as an actor or as a fork/join target.
class Trace {
 public:
  Trace() = default;

  explicit Trace(std::vector<Event> events) : events_(std::move(events)) {
    thread_of_.reserve(events_.size());
    object_of_.reserve(events_.size());
    for (std::size_t i = 0; i < events_.size(); ++i) {
      Event& e = events_[i];
      e.pos = static_cast<Pos>(i + 1);
      if (e.loc.empty()) e.loc = std::to_string(e.pos);
      thread_of_.push_back(thread_slot_or_add(e.tid));
      switch (e.op) {
        case Op::Read:
        case Op::Write: object_of_.push_back(variables_.intern(e.target)); break;
        case Op::Acquire:
        case Op::Release: object_of_.push_back(mutexes_.intern(e.target)); break;
        case Op::Fork:
        case Op::Join: {
          auto peer = detail::parse_uint(e.target);
          if (!peer) throw ValidationError(e.pos, "fork/join target is not a thread id: " + e.target);
          object_of_.push_back(thread_slot_or_add(*peer));
          break;
        }
      }
    }
  }

  std::span<const Event> events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }

  const Event& at(Pos pos) const {
    if (pos == 0 || pos > events_.size()) throw std::out_of_range("trace position " + std::to_string(pos));
    return events_[pos - 1];
  }

  /// Thread slot of the event's actor.
  Slot thread_slot(Pos pos) const { return thread_of_.at(pos - 1); }
  /// Variable slot (rd/wr), mutex slot (acq/rel) or target thread slot (fork/join).
  Slot object_slot(Pos pos) const { return object_of_.at(pos - 1); }

  std::size_t thread_count() const { return thread_ids_.size(); }
  std::size_t variable_count() const { return variables_.names().size(); }
  std::size_t mutex_count() const { return mutexes_.names().size(); }

  ThreadId thread_id(Slot slot) const { return thread_ids_.at(slot); }
  const std::string& variable_name(Slot slot) const { return variables_.names().at(slot); }
  const std::string& mutex_name(Slot slot) const { return mutexes_.names().at(slot); }
  const std::vector<ThreadId>& threads() const { return thread_ids_; }
  const std::vector<std::string>& variables() const { return variables_.names(); }
  const std::vector<std::string>& mutexes() const { return mutexes_.names(); }

  std::optional<Slot> find_thread(ThreadId tid) const {
    auto it = thread_index_.find(tid);
    if (it == thread_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Slot> find_variable(const std::string& name) const { return variables_.find(name); }

  friend bool operator==(const Trace& a, const Trace& b) { return a.events_ == b.events_; }

 private:
  Slot thread_slot_or_add(ThreadId tid) {
    auto [it, inserted] = thread_index_.try_emplace(tid, static_cast<Slot>(thread_ids_.size()));
    if (inserted) thread_ids_.push_back(tid);
    return it->second;
  }

  std::vector<Event> events_;
  std::vector<Slot> thread_of_;
  std::vector<Slot> object_of_;
  std::vector<ThreadId> thread_ids_;
  std::unordered_map<ThreadId, Slot> thread_index_;
  detail::Interner variables_;
  detail::Interner mutexes_;
};

/// Parses the CSV trace format: one event per line, `tid,op,target[,loc]`.
/// Lines starting with `#` and blank lines are skipped; they do not take a
/// trace position.
inline Trace parse_trace(std::istream& in) {
  std::vector<Event> events;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      auto comma = line.find(',', start);
      fields.push_back(detail::trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 3 || fields.size() > 4)
      throw ParseError(line_no, "expected 3 or 4 fields, got " + std::to_string(fields.size()));

    auto tid = detail::parse_uint(fields[0]);
    if (!tid) throw ParseError(line_no, "thread id is not a non-negative integer: '" + std::string(fields[0]) + "'");
    auto op = parse_op_code(fields[1]);
    if (!op) throw ParseError(line_no, "unknown op code '" + std::string(fields[1]) + "'");
    if (fields[2].empty()) throw ParseError(line_no, "empty target");

    Event e;
    e.tid = *tid;
    e.op = *op;
    e.target = std::string(fields[2]);
    if (fields.size() == 4) e.loc = std::string(fields[3]);

    if (e.op == Op::Fork || e.op == Op::Join) {
      auto peer = detail::parse_uint(fields[2]);
      if (!peer) throw ParseError(line_no, "fork/join target is not a thread id: '" + e.target + "'");
      if (*peer == e.tid) throw ParseError(line_no, "thread cannot fork or join itself");
    }
    events.push_back(std::move(e));
  }
  return Trace(std::move(events));
}

inline Trace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

inline void render_trace(std::ostream& out, const Trace& t) {
  for (const Event& e : t.events()) out << e.tid << ',' << op_code(e.op) << ',' << e.target << ',' << e.loc << '\n';
}

inline std::string render_trace(const Trace& t) {
  std::ostringstream out;
  render_trace(out, t);
  return out.str();
}

/// Checks proper acquire/release order and proper fork/join order.
///
/// With `repair`, acquires still open at the end of the trace are closed by
/// synthetic releases appended in thread-slot order (innermost first within
/// a thread). Every other defect is an error.
inline Trace validate_trace(const Trace& t, bool repair = false) {
  struct Holder {
    ThreadId tid;
    Pos acquired_at;
  };
  std::map<std::string, Holder> held;  // mutex -> current holder
  std::unordered_map<ThreadId, Pos> forked_at;
  std::unordered_map<ThreadId, Pos> joined_at;
  std::unordered_map<ThreadId, bool> seen;

  for (const Event& e : t.events()) {
    if (e.op == Op::Fork || e.op == Op::Join) {
      auto peer = detail::parse_uint(e.target);
      if (!peer) throw ValidationError(e.pos, "fork/join target is not a thread id");
      if (*peer == e.tid) throw ValidationError(e.pos, "thread cannot fork or join itself");
    }
    if (auto j = joined_at.find(e.tid); j != joined_at.end())
      throw ValidationError(e.pos, "event of thread " + std::to_string(e.tid) + " after its join at position " +
                                       std::to_string(j->second));
    seen[e.tid] = true;

    switch (e.op) {
      case Op::Acquire: {
        auto it = held.find(e.target);
        if (it != held.end())
          throw ValidationError(e.pos, "acquire of " + e.target + " while held by thread " +
                                           std::to_string(it->second.tid) + " since position " +
                                           std::to_string(it->second.acquired_at));
        held.emplace(e.target, Holder{e.tid, e.pos});
        break;
      }
      case Op::Release: {
        auto it = held.find(e.target);
        if (it == held.end() || it->second.tid != e.tid)
          throw ValidationError(e.pos, "release of " + e.target + " without matching acquire");
        held.erase(it);
        break;
      }
      case Op::Fork: {
        ThreadId child = *detail::parse_uint(e.target);
        if (forked_at.contains(child)) throw ValidationError(e.pos, "thread " + e.target + " forked twice");
        if (seen.contains(child)) throw ValidationError(e.pos, "thread " + e.target + " has events before its fork");
        forked_at.emplace(child, e.pos);
        break;
      }
      case Op::Join: {
        ThreadId child = *detail::parse_uint(e.target);
        if (joined_at.contains(child)) throw ValidationError(e.pos, "thread " + e.target + " joined twice");
        for (const auto& [mutex, h] : held)
          if (h.tid == child)
            throw ValidationError(e.pos, "thread " + e.target + " joined while holding " + mutex);
        joined_at.emplace(child, e.pos);
        break;
      }
      case Op::Read:
      case Op::Write: break;
    }
  }

  if (held.empty()) return t;
  if (!repair) {
    Pos first = 0;
    for (const auto& [mutex, h] : held)
      if (first == 0 || h.acquired_at < first) first = h.acquired_at;
    throw ValidationError(first, "acquire without matching release");
  }

  std::vector<std::pair<std::string, Holder>> open(held.begin(), held.end());
  std::sort(open.begin(), open.end(), [&](const auto& a, const auto& b) {
    Slot sa = *t.find_thread(a.second.tid), sb = *t.find_thread(b.second.tid);
    if (sa != sb) return sa < sb;
    return a.second.acquired_at > b.second.acquired_at;
  });
  std::vector<Event> events(t.events().begin(), t.events().end());
  for (const auto& [mutex, h] : open) {
    Event rel;
    rel.tid = h.tid;
    rel.op = Op::Release;
    rel.target = mutex;
    events.push_back(std::move(rel));
  }
  return Trace(std::move(events));
}

/// Events of thread `tid` in trace order.
inline std::vector<Event> project(const Trace& t, ThreadId tid) {
  std::vector<Event> out;
  for (const Event& e : t.events())
    if (e.tid == tid) out.push_back(e);
  return out;
}

}  // namespace racepair
