#include "harmonia/core/types.hpp"

#include <charconv>
#include <stdexcept>

#include "harmonia/core/message.hpp"

namespace harmonia {

std::string to_string(const SeqNum& s) {
  return std::to_string(s.switch_id) + ":" + std::to_string(s.counter);
}

std::ostream& operator<<(std::ostream& os, const SeqNum& s) {
  return os << s.switch_id << ':' << s.counter;
}

SeqNum parse_seq(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("sequence number must look like sid:ctr");
  }
  SeqNum out;
  auto parse = [&](std::string_view part, std::uint64_t& v) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty()) {
      throw std::invalid_argument("bad sequence number: " + std::string(text));
    }
  };
  parse(text.substr(0, colon), out.switch_id);
  parse(text.substr(colon + 1), out.counter);
  return out;
}

ObjectId hash_object_id(std::span<const std::byte> key) {
  if (key.empty()) {
    throw std::invalid_argument("object key must be non-empty");
  }
  std::uint32_t h = 2166136261u;
  for (std::byte b : key) {
    h ^= static_cast<std::uint32_t>(b);
    h *= 16777619u;
  }
  return ObjectId{h};
}

ObjectId hash_object_id(std::string_view key) {
  return hash_object_id(std::as_bytes(std::span(key.data(), key.size())));
}

namespace {
constexpr std::string_view kKindNames[kMessageKindCount] = {
    "Read",          "Write",     "WriteCompletion", "ReadReply",     "WriteReply",
    "Prepare",       "PrepareOk", "Commit",          "CommitAck",     "ChainForward",
    "ChainAck",      "StateUpdate", "StateUpdateAck", "CraqDirtyMark", "CraqCommit",
    "LeaseGrant",    "LeaseRevoke",
};
}  // namespace

std::string_view to_string(MessageKind kind) {
  return kKindNames[static_cast<int>(kind)];
}

std::optional<MessageKind> parse_message_kind(std::string_view name) {
  for (int i = 0; i < kMessageKindCount; ++i) {
    if (kKindNames[i] == name) return static_cast<MessageKind>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::PrimaryBackup: return "pb";
    case Protocol::Chain: return "cr";
    case Protocol::Craq: return "craq";
    case Protocol::Viewstamped: return "vr";
  }
  return "?";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  if (name == "pb") return Protocol::PrimaryBackup;
  if (name == "cr") return Protocol::Chain;
  if (name == "craq") return Protocol::Craq;
  if (name == "vr") return Protocol::Viewstamped;
  return std::nullopt;
}

}  // namespace harmonia
