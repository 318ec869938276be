#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace harmonia::mc {

// Finitized constants of the abstract protocol. Items, switches and
// replicas are numbered 0..n-1, 1..n and 0..n-1 respectively.
enum class Mutation {
  None,
  ReadAheadGateOff,   // HandleHarmoniaRead skips GTE(m.lastCommitted, w)
  ReadBehindGateOff,  // HandleHarmoniaRead skips the replica up-to-date test
  StaleSwitchReads,   // HandleHarmoniaRead accepts reads from any switch
};

std::string_view to_string(Mutation m);
// Accepts the names above in kebab case ("read-ahead-gate-off", ...) and "none".
Mutation parse_mutation(std::string_view name);

struct McConfig {
  int data_items = 2;
  int num_switches = 2;
  int replicas = 2;
  bool is_read_behind = false;
  int seq_bound = 3;            // SendWrite disabled once a switch has used this many
  int depth = 12;               // BFS levels below Init
  std::size_t state_budget = 50'000'000;
  Mutation mutation = Mutation::None;

  // Throws std::invalid_argument when a bound is out of range.
  void validate() const;
};

// A write record. switch_num == 0 is BottomWrite, which carries no item.
struct W {
  std::uint8_t switch_num = 0;
  std::uint8_t seq = 0;
  std::uint8_t item = kNoItem;

  static constexpr std::uint8_t kNoItem = 0xFF;

  bool is_bottom() const { return switch_num == 0; }
  friend auto operator<=>(const W&, const W&) = default;
};

inline constexpr W kBottom{};

// Lexicographic (switch_num, seq) comparison. The item is not part of the order.
bool gte(const W& a, const W& b);
bool gt(const W& a, const W& b);

enum class MType : std::uint8_t { Write, ProtocolRead, HarmoniaRead, ReadResponse };

// One message of the monotone message set. Fields not used by a type stay
// zero so that equal messages compare equal.
struct Message {
  MType type = MType::Write;
  std::uint8_t item = 0;       // Write, ProtocolRead, HarmoniaRead
  std::uint8_t switch_num = 0; // HarmoniaRead
  W write;                     // Write: the write itself; HarmoniaRead: lastCommitted; ReadResponse: result
  W ghost;                     // reads and responses

  friend auto operator<=>(const Message&, const Message&) = default;
};

struct SwitchState {
  std::uint8_t seq = 0;
  std::vector<std::uint8_t> dirty;  // per item; 0 means not in the dirty set
  W last_committed;

  friend auto operator<=>(const SwitchState&, const SwitchState&) = default;
};

struct McState {
  std::vector<Message> messages;  // sorted, duplicate free
  std::vector<SwitchState> switches;  // index 0 is switch 1
  std::uint8_t active_switch = 1;
  std::vector<W> shared_log;
  std::vector<std::uint8_t> commit_points;

  static McState init(const McConfig& cfg);

  // Canonical byte string: equal states encode identically and vice versa.
  std::string encode() const;
  static McState decode(std::string_view bytes, const McConfig& cfg);

  friend bool operator==(const McState&, const McState&) = default;
};

enum class ActionKind : std::uint8_t {
  SendWrite,
  SendRead,
  ProcessWriteCompletion,
  HandleWrite,
  HandleProtocolRead,
  HandleHarmoniaRead,
  CommitWrite,
  SwitchFailover,
};

std::string_view to_string(ActionKind k);

struct Action {
  ActionKind kind = ActionKind::SendWrite;
  std::uint8_t sw = 0;       // SendWrite, SendRead
  std::uint8_t item = 0;     // SendWrite, SendRead
  std::uint8_t replica = 0;  // HandleHarmoniaRead, CommitWrite
  W write;                   // ProcessWriteCompletion
  Message message;           // HandleWrite, HandleProtocolRead, HandleHarmoniaRead

  friend bool operator==(const Action&, const Action&) = default;
};

std::string to_string(const W& w);
std::string to_string(const Message& m);
std::string to_string(const Action& a);

// Derived views of a state.
std::size_t committed_length(const McState& s, const McConfig& cfg);
W max_committed_write_for(const McState& s, const McConfig& cfg, std::uint8_t item);
W max_committed_write(const McState& s, const McConfig& cfg);

// Actions enabled in `s`, in a fixed enumeration order: per switch and item
// SendWrite then SendRead; ProcessWriteCompletion per distinct log entry in
// log order; message handlers per message in set order (HandleHarmoniaRead
// per replica); CommitWrite per replica; SwitchFailover.
std::vector<Action> enabled_actions(const McState& s, const McConfig& cfg);
bool is_enabled(const McState& s, const McConfig& cfg, const Action& a);

// Successor state. Throws std::logic_error when `a` is not enabled.
McState apply(const McState& s, const McConfig& cfg, const Action& a);

enum class Clause { Visibility, Integrity };
std::string_view to_string(Clause c);

struct CheckResult {
  bool ok = true;
  std::optional<Clause> clause;
  Message offending;
};

// The linearizability predicate over every ReadResponse in `s`.
CheckResult check(const McState& s, const McConfig& cfg);

// Human readable differences between two states, one line each.
std::vector<std::string> diff(const McState& before, const McState& after);
std::string describe(const McState& s);

}  // namespace harmonia::mc
