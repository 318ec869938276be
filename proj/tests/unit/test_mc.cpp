#include <algorithm>

#include "doctest.h"
#include "harmonia/mc/explore.hpp"
#include "harmonia/mc/model.hpp"

using namespace harmonia::mc;

namespace {

bool has_kind(const std::vector<Action>& acts, ActionKind k) {
  return std::any_of(acts.begin(), acts.end(), [k](const Action& a) { return a.kind == k; });
}

McConfig small(bool read_behind, Mutation m = Mutation::None, int depth = 8) {
  McConfig c;
  c.is_read_behind = read_behind;
  c.mutation = m;
  c.depth = depth;
  return c;
}

}  // namespace

TEST_CASE("write order compares switch number first") {
  CHECK(gt(W{2, 1, 0}, W{1, 3, 1}));
  CHECK(gte(W{1, 2, 0}, W{1, 2, 1}));
  CHECK_FALSE(gt(W{1, 2, 0}, W{1, 2, 1}));
  CHECK(gt(W{1, 1, 0}, kBottom));
  CHECK(gte(kBottom, kBottom));
}

TEST_CASE("initial state enables only client sends") {
  McConfig c = small(false);
  McState s = McState::init(c);
  auto acts = enabled_actions(s, c);
  REQUIRE_FALSE(acts.empty());
  for (const auto& a : acts) {
    CHECK((a.kind == ActionKind::SendWrite || a.kind == ActionKind::SendRead ||
           a.kind == ActionKind::SwitchFailover));
  }
  // SendWrite only from the active switch, SendRead from any, per item.
  CHECK(std::count_if(acts.begin(), acts.end(),
                      [](const Action& a) { return a.kind == ActionKind::SendWrite; }) == 2);
  CHECK(has_kind(acts, ActionKind::SendRead));
  CHECK_FALSE(has_kind(acts, ActionKind::CommitWrite));
  CHECK_FALSE(has_kind(acts, ActionKind::ProcessWriteCompletion));
}

TEST_CASE("SendWrite enables HandleWrite; a handled write can be committed") {
  McConfig c = small(false);
  McState s = McState::init(c);
  auto acts = enabled_actions(s, c);
  auto sw = std::find_if(acts.begin(), acts.end(),
                         [](const Action& a) { return a.kind == ActionKind::SendWrite; });
  REQUIRE(sw != acts.end());
  McState t = apply(s, c, *sw);
  CHECK(t.switches[0].seq == 1);
  CHECK(t.switches[0].dirty[sw->item] == 1);
  auto next = enabled_actions(t, c);
  REQUIRE(has_kind(next, ActionKind::HandleWrite));
  auto hw = *std::find_if(next.begin(), next.end(),
                          [](const Action& a) { return a.kind == ActionKind::HandleWrite; });
  McState u = apply(t, c, hw);
  CHECK(u.shared_log.size() == 1);
  CHECK(has_kind(enabled_actions(u, c), ActionKind::CommitWrite));
  // A disabled action is a programming error.
  CHECK_THROWS_AS(apply(s, c, hw), std::logic_error);
}

TEST_CASE("failover is disabled once the last switch is active") {
  McConfig c = small(false);
  McState s = McState::init(c);
  Action fail;
  fail.kind = ActionKind::SwitchFailover;
  REQUIRE(is_enabled(s, c, fail));
  McState t = apply(s, c, fail);
  CHECK(t.active_switch == 2);
  CHECK_FALSE(has_kind(enabled_actions(t, c), ActionKind::SwitchFailover));
  CHECK_FALSE(is_enabled(t, c, fail));
}

TEST_CASE("state encoding is canonical") {
  McConfig c = small(true);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    McState s = replay(c, random_trace(c, seed, 15));
    McState back = McState::decode(s.encode(), c);
    CHECK(back == s);
    CHECK(back.encode() == s.encode());
  }
}

TEST_CASE("depth zero verifies trivially") {
  McConfig c = small(false);
  c.depth = 0;
  auto r = explore(c);
  CHECK(r.outcome == Outcome::Verified);
  CHECK(r.states == 1);
}

TEST_CASE("shallow exhaustive runs verify both modes and are deterministic") {
  for (bool rb : {false, true}) {
    McConfig c = small(rb, Mutation::None, 7);
    auto a = explore(c);
    auto b = explore(c);
    CHECK(a.outcome == Outcome::Verified);
    CHECK(a.states == b.states);
    CHECK(a.transitions == b.transitions);
    CHECK(a.depth == 7);
  }
}

TEST_CASE("state budget stops the search") {
  McConfig c = small(false, Mutation::None, 12);
  c.state_budget = 1000;
  auto r = explore(c);
  CHECK(r.outcome == Outcome::BudgetExhausted);
  CHECK(r.states == 1000);
}

TEST_CASE("gate mutations produce replayable counterexamples") {
  struct Case {
    bool read_behind;
    Mutation m;
    Clause clause;
  };
  for (auto [rb, m, clause] : {Case{false, Mutation::ReadAheadGateOff, Clause::Integrity},
                               Case{true, Mutation::ReadBehindGateOff, Clause::Visibility}}) {
    CAPTURE(to_string(m));
    McConfig c = small(rb, m, 10);
    auto r = explore(c);
    REQUIRE(r.outcome == Outcome::Counterexample);
    CHECK(r.violation.clause == clause);
    CHECK(static_cast<int>(r.trace.size()) == r.depth);
    McState end = replay(c, r.trace);
    auto verdict = check(end, c);
    CHECK_FALSE(verdict.ok);
    CHECK(verdict.offending == r.violation.offending);
    // Without the mutation the model is clean to the same depth.
    CHECK(explore(small(rb, Mutation::None, r.depth)).outcome == Outcome::Verified);
    // The concrete checker agrees about the violating trace.
    auto concrete = concretize_and_check(c, r.trace);
    if (concrete.representable) CHECK(concrete.violation);
    CHECK_FALSE(format_trace(c, r.trace).empty());
  }
}

TEST_CASE("stale-switch reads break read-behind mode") {
  McConfig c = small(true, Mutation::StaleSwitchReads, 10);
  auto r = explore(c);
  REQUIRE(r.outcome == Outcome::Counterexample);
  CHECK_FALSE(check(replay(c, r.trace), c).ok);
  CHECK(std::any_of(r.trace.begin(), r.trace.end(),
                    [](const Action& a) { return a.kind == ActionKind::SwitchFailover; }));
}

TEST_CASE("random traces: the simulator's checker agrees with the abstract predicate") {
  std::size_t compared = 0, violations = 0;
  for (auto m : {Mutation::None, Mutation::ReadAheadGateOff, Mutation::ReadBehindGateOff}) {
    for (bool rb : {false, true}) {
      McConfig c = small(rb, m, 30);
      for (std::uint64_t seed = 1; seed <= 800; ++seed) {
        auto trace = random_trace(c, seed * 7919 + static_cast<std::uint64_t>(m), 30);
        // Cut the trace at its first violating state so both sides judge the same prefix.
        McState s = McState::init(c);
        std::vector<Action> prefix;
        bool abstract_violation = false;
        for (const auto& a : trace) {
          s = apply(s, c, a);
          prefix.push_back(a);
          if (!check(s, c).ok) {
            abstract_violation = true;
            break;
          }
        }
        auto concrete = concretize_and_check(c, prefix);
        if (!concrete.representable) continue;
        ++compared;
        violations += abstract_violation;
        CHECK(concrete.violation == abstract_violation);
      }
    }
  }
  MESSAGE(compared << " traces compared, " << violations << " violating");
  CHECK(compared > 500);
  CHECK(violations > 0);
}

TEST_CASE("mutation names") {
  CHECK(parse_mutation("read-ahead-gate-off") == Mutation::ReadAheadGateOff);
  CHECK(parse_mutation("read-behind-gate-off") == Mutation::ReadBehindGateOff);
  CHECK(parse_mutation("stale-switch-reads") == Mutation::StaleSwitchReads);
  CHECK(parse_mutation("none") == Mutation::None);
  CHECK_THROWS_AS(parse_mutation("gate"), std::invalid_argument);
  McConfig bad;
  bad.num_switches = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
