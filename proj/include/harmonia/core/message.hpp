#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "harmonia/core/types.hpp"

namespace harmonia {

enum class MessageKind : std::uint8_t {
  Read,
  Write,
  WriteCompletion,
  ReadReply,
  WriteReply,
  Prepare,
  PrepareOk,
  Commit,
  CommitAck,
  ChainForward,
  ChainAck,
  StateUpdate,
  StateUpdateAck,
  CraqDirtyMark,
  CraqCommit,
  LeaseGrant,
  LeaseRevoke,
};

inline constexpr int kMessageKindCount = 17;

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> parse_message_kind(std::string_view name);

enum class Protocol : std::uint8_t { PrimaryBackup, Chain, Craq, Viewstamped };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

// True for protocols where a lone replica may have applied uncommitted writes.
constexpr bool is_read_ahead(Protocol p) { return p != Protocol::Viewstamped; }

// One packet. Fields that do not apply to a kind are left at their defaults.
struct Message {
  MessageKind kind = MessageKind::Read;
  NodeId src = kNoNode;
  NodeId dst = kNoNode;

  ObjectId object;
  SeqNum seq;                 // write sequence number (writes, completions, replies)
  SeqNum last_committed;      // switch stamp on single-replica reads
  std::uint64_t switch_id = 0;  // switch that forwarded a read / whose lease is meant
  bool single_replica = false;
  bool carries_completion = false;  // completion piggybacked on a WriteReply

  // Request bookkeeping.
  NodeId client = kNoNode;
  std::uint64_t request_id = 0;
  SimTime issued_at = 0;

  // Replication-protocol log position (1-based) for intra-group messages.
  std::uint64_t index = 0;
  std::uint64_t commit_index = 0;
  SimTime lease_expiry = 0;

  Value payload;
  SeqNum version;  // version returned by a ReadReply

  // Checker metadata. Protocol logic never reads it.
  SeqNum ghost_last_response;
};

}  // namespace harmonia
