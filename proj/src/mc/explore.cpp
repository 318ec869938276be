#include "harmonia/mc/explore.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "harmonia/checker/monitor.hpp"
#include "harmonia/checker/oracle.hpp"

namespace harmonia::mc {

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Verified: return "verified";
    case Outcome::Counterexample: return "counterexample";
    case Outcome::BudgetExhausted: return "budget-exhausted";
  }
  return "?";
}

nlohmann::json ExploreResult::to_json() const {
  nlohmann::json j;
  j["outcome"] = std::string(to_string(outcome));
  j["states"] = states;
  j["transitions"] = transitions;
  j["depth"] = depth;
  auto steps = nlohmann::json::array();
  for (const auto& a : trace) steps.push_back(to_string(a));
  j["trace"] = steps;
  if (!violation.ok) {
    j["violation"] = {{"clause", std::string(to_string(*violation.clause))},
                      {"response", to_string(violation.offending)}};
  }
  return j;
}

namespace {

struct Node {
  std::uint32_t parent;
  Action via;
};

std::vector<Action> path_to(const std::vector<Node>& nodes, std::uint32_t idx) {
  std::vector<Action> out;
  while (idx != 0) {
    out.push_back(nodes[idx].via);
    idx = nodes[idx].parent;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

ExploreResult explore(const McConfig& cfg) {
  cfg.validate();
  ExploreResult res;

  // Node i is encoded as store[i]; node 0 is Init. A deque keeps the
  // strings in place so the visited set can key on views into them.
  std::deque<std::string> store;
  std::vector<Node> nodes;
  std::unordered_map<std::string_view, std::uint32_t> seen;

  McState init = McState::init(cfg);
  store.push_back(init.encode());
  seen.emplace(store.back(), 0);
  nodes.push_back({0, {}});
  res.states = 1;

  if (auto c = check(init, cfg); !c.ok) {
    res.outcome = Outcome::Counterexample;
    res.violation = c;
    return res;
  }

  std::vector<std::uint32_t> frontier{0};
  for (int level = 0; level < cfg.depth && !frontier.empty(); ++level) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t idx : frontier) {
      McState s = McState::decode(store[idx], cfg);
      for (const Action& a : enabled_actions(s, cfg)) {
        ++res.transitions;
        McState t = apply(s, cfg, a);
        std::string enc = t.encode();
        if (seen.count(enc)) continue;
        auto id = static_cast<std::uint32_t>(nodes.size());
        store.push_back(std::move(enc));
        seen.emplace(store.back(), id);
        nodes.push_back({idx, a});
        ++res.states;
        if (auto c = check(t, cfg); !c.ok) {
          res.outcome = Outcome::Counterexample;
          res.violation = c;
          res.depth = level + 1;
          res.trace = path_to(nodes, id);
          return res;
        }
        if (res.states >= cfg.state_budget) {
          res.outcome = Outcome::BudgetExhausted;
          res.depth = level + 1;
          return res;
        }
        next.push_back(id);
      }
    }
    if (!next.empty()) res.depth = level + 1;
    frontier = std::move(next);
  }
  return res;
}

McState replay(const McConfig& cfg, const std::vector<Action>& trace) {
  McState s = McState::init(cfg);
  for (const auto& a : trace) s = apply(s, cfg, a);
  return s;
}

std::string format_trace(const McConfig& cfg, const std::vector<Action>& trace) {
  std::string out;
  McState s = McState::init(cfg);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    McState t = apply(s, cfg, trace[i]);
    out += std::to_string(i + 1) + ". " + to_string(trace[i]) + "\n";
    for (const auto& line : diff(s, t)) out += "     " + line + "\n";
    s = std::move(t);
  }
  return out;
}

ConcreteVerdict concretize_and_check(const McConfig& cfg, const std::vector<Action>& trace) {
  using checker::Mode;
  checker::Oracle oracle(cfg.is_read_behind ? Mode::ReadBehind : Mode::ReadAhead,
                         static_cast<std::size_t>(cfg.replicas));
  checker::Monitor monitor(oracle, 0);
  auto seq_of = [](const W& w) { return SeqNum{w.switch_num, w.seq}; };

  // Ghosts handed out by the monitor, keyed by the abstract read message.
  std::map<Message, SeqNum> ghosts;
  ConcreteVerdict v;
  McState s = McState::init(cfg);
  SimTime now = 0;
  for (const auto& a : trace) {
    McState t = apply(s, cfg, a);
    ++now;
    switch (a.kind) {
      case ActionKind::HandleWrite:
        if (std::find(s.shared_log.begin(), s.shared_log.end(), a.message.write) !=
            s.shared_log.end()) {
          v.representable = false;
          return v;
        }
        oracle.record_decided(
            WriteRecord{seq_of(a.message.write), ObjectId{a.message.write.item}, {}});
        break;
      case ActionKind::CommitWrite:
        oracle.record_applied(a.replica, t.commit_points[a.replica]);
        break;
      case ActionKind::SendRead: {
        auto added = std::find_if(t.messages.begin(), t.messages.end(), [&](const Message& m) {
          return !std::binary_search(s.messages.begin(), s.messages.end(), m);
        });
        SeqNum ghost = monitor.on_read_issued(ObjectId{a.item}, now);
        if (added != t.messages.end()) ghosts.emplace(*added, ghost);
        break;
      }
      case ActionKind::HandleProtocolRead:
      case ActionKind::HandleHarmoniaRead: {
        W result = a.kind == ActionKind::HandleProtocolRead
                       ? max_committed_write_for(s, cfg, a.message.item)
                       : [&] {
                           W best = kBottom;
                           for (std::size_t i = 0; i < s.commit_points[a.replica]; ++i) {
                             const W& w = s.shared_log[i];
                             if (w.item == a.message.item && gte(w, best)) best = w;
                           }
                           return best;
                         }();
        auto g = ghosts.find(a.message);
        SeqNum ghost = g != ghosts.end() ? g->second : seq_of(a.message.ghost);
        auto verdict = monitor.on_read_response(ObjectId{a.message.item},
                                                result.is_bottom() ? kBottomWrite : seq_of(result),
                                                ghost, now);
        if (!verdict.ok) v.violation = true;
        break;
      }
      default:
        break;
    }
    s = std::move(t);
  }
  return v;
}

std::vector<Action> random_trace(const McConfig& cfg, std::uint64_t seed, int steps) {
  std::mt19937_64 rng(seed);
  std::vector<Action> out;
  McState s = McState::init(cfg);
  for (int i = 0; i < steps; ++i) {
    auto acts = enabled_actions(s, cfg);
    if (acts.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, acts.size() - 1);
    const Action& a = acts[pick(rng)];
    s = apply(s, cfg, a);
    out.push_back(a);
  }
  return out;
}

}  // namespace harmonia::mc
