#pragma once

#include <memory>

#include "harmonia/protocols/replica.hpp"

namespace harmonia::protocols::detail {

std::unique_ptr<Replica> make_primary_backup(ReplicaGroup& g, std::size_t index);
std::unique_ptr<Replica> make_chain(ReplicaGroup& g, std::size_t index);
std::unique_ptr<Replica> make_craq(ReplicaGroup& g, std::size_t index);
std::unique_ptr<Replica> make_viewstamped(ReplicaGroup& g, std::size_t index);

// Entries resent per retransmission round and peer.
inline constexpr std::uint64_t kRetransmitBatch = 64;

}  // namespace harmonia::protocols::detail
