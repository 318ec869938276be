#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "harmonia/mc/model.hpp"

namespace harmonia::mc {

enum class Outcome { Verified, Counterexample, BudgetExhausted };

std::string_view to_string(Outcome o);

struct ExploreResult {
  Outcome outcome = Outcome::Verified;
  std::size_t states = 0;       // distinct states visited
  std::size_t transitions = 0;  // enabled actions expanded
  int depth = 0;                // deepest BFS level reached
  std::vector<Action> trace;    // shortest path from Init to the violation
  CheckResult violation;

  nlohmann::json to_json() const;
};

// Breadth-first search from Init with deduplication on the canonical
// encoding. Every reached state is checked; the first violating state in BFS
// order yields a shortest counterexample.
ExploreResult explore(const McConfig& cfg);

// Applies `trace` from Init. Throws std::logic_error if a step is disabled.
McState replay(const McConfig& cfg, const std::vector<Action>& trace);

// Numbered action list with the state changes each step makes.
std::string format_trace(const McConfig& cfg, const std::vector<Action>& trace);

// Feeds a trace through the simulator's oracle and monitor (decided writes,
// applied indices, read issue and response) and reports whether the monitor
// flagged a read. Returns false from `representable` for traces the
// simulator's checker cannot express, namely a write appended twice.
struct ConcreteVerdict {
  bool representable = true;
  bool violation = false;
};
ConcreteVerdict concretize_and_check(const McConfig& cfg, const std::vector<Action>& trace);

// Random walk of at most `steps` enabled actions from Init.
std::vector<Action> random_trace(const McConfig& cfg, std::uint64_t seed, int steps);

}  // namespace harmonia::mc
