#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>

#include "harmonia/net/network.hpp"
#include "harmonia/workload/workload.hpp"

namespace harmonia::workload {

struct Completion {
  OpKind kind = OpKind::Read;
  ObjectId key;
  SimTime first_issued = 0;
  SimTime finished = 0;
  std::uint32_t attempts = 0;
  SeqNum version;  // write: assigned seq; read: version returned
};

struct ClientOptions {
  SimTime timeout = 100 * kMicrosecond;
  LoopMode mode = LoopMode::Closed;
  SimTime period = 0;  // open loop: one new op every `period`
  SimTime start_at = 0;
  SimTime stop_at = std::numeric_limits<SimTime>::max();  // no new ops at or after this
  std::optional<OpKind> only;  // force every op to this kind
};

// A client issuing requests through its bound switch. Closed-loop clients
// keep one operation outstanding; open-loop clients start one per period.
// Unanswered attempts are retried after the timeout (writes dropped by a
// full dirty set and requests lost in the network look the same).
class Client : public net::Node {
 public:
  using CompletionFn = std::function<void(const Completion&)>;

  Client(net::Network& net, NodeId self, Generator gen, ClientOptions opts, CompletionFn done);

  void bind(NodeId switch_node) { switch_ = switch_node; }
  NodeId bound() const { return switch_; }

  // Schedules the first operation at opts.start_at.
  void start();

  void on_message(const Message& msg) override;
  void on_timer(std::uint64_t tag) override;

  NodeId id() const { return self_; }
  std::uint64_t issued() const { return issued_; }
  std::uint64_t completed() const { return completed_; }
  std::uint64_t retries() const { return retries_; }
  std::size_t outstanding() const { return ops_.size(); }

 private:
  struct Outstanding {
    Op op;
    SimTime first = 0;
    SimTime deadline = 0;
    std::uint32_t attempts = 0;
  };

  void begin_op();
  void send_attempt(std::uint64_t op_id);

  net::Network& net_;
  NodeId self_;
  Generator gen_;
  ClientOptions opts_;
  CompletionFn done_;
  NodeId switch_ = kNoNode;

  std::uint64_t next_op_ = 1;
  std::uint64_t next_request_ = 1;
  std::map<std::uint64_t, Outstanding> ops_;
  std::map<std::uint64_t, std::uint64_t> request_to_op_;

  std::uint64_t issued_ = 0;
  std::uint64_t completed_ = 0;
  std::uint64_t retries_ = 0;
};

}  // namespace harmonia::workload
