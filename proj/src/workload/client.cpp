#include "harmonia/workload/client.hpp"

#include <stdexcept>
#include <string>

namespace harmonia::workload {

namespace {
constexpr std::uint64_t kTickTag = 1;
std::uint64_t retry_tag(std::uint64_t op_id) { return op_id << 1; }
}  // namespace

Client::Client(net::Network& net, NodeId self, Generator gen, ClientOptions opts, CompletionFn done)
    : net_(net), self_(self), gen_(std::move(gen)), opts_(opts), done_(std::move(done)) {
  if (opts_.mode == LoopMode::Open && opts_.period <= 0) {
    throw std::invalid_argument("open-loop client needs a positive period");
  }
  if (opts_.timeout <= 0) throw std::invalid_argument("client timeout must be positive");
}

void Client::start() {
  SimTime delay = opts_.start_at > net_.now() ? opts_.start_at - net_.now() : 0;
  net_.set_timer(self_, delay, kTickTag);
}

void Client::begin_op() {
  if (net_.now() >= opts_.stop_at) return;
  Op op = gen_.next_op();
  if (opts_.only) op.kind = *opts_.only;
  std::uint64_t id = next_op_++;
  ops_[id] = Outstanding{op, net_.now(), 0, 0};
  ++issued_;
  send_attempt(id);
}

void Client::send_attempt(std::uint64_t op_id) {
  auto& o = ops_.at(op_id);
  if (o.attempts > 0) ++retries_;
  ++o.attempts;
  o.deadline = net_.now() + opts_.timeout;

  Message m;
  m.kind = o.op.kind == OpKind::Write ? MessageKind::Write : MessageKind::Read;
  m.object = o.op.key;
  m.client = self_;
  m.request_id = next_request_++;
  m.issued_at = net_.now();
  if (o.op.kind == OpKind::Write) {
    m.payload = "c" + std::to_string(self_) + "#" + std::to_string(m.request_id);
  }
  request_to_op_[m.request_id] = op_id;
  if (switch_ != kNoNode) net_.send(std::move(m), self_, switch_);
  net_.set_timer(self_, opts_.timeout, retry_tag(op_id));
}

void Client::on_message(const Message& msg) {
  if (msg.kind != MessageKind::ReadReply && msg.kind != MessageKind::WriteReply) return;
  auto r = request_to_op_.find(msg.request_id);
  if (r == request_to_op_.end()) return;
  std::uint64_t op_id = r->second;
  auto it = ops_.find(op_id);
  if (it == ops_.end()) return;

  Completion c;
  c.kind = it->second.op.kind;
  c.key = it->second.op.key;
  c.first_issued = it->second.first;
  c.finished = net_.now();
  c.attempts = it->second.attempts;
  c.version = msg.kind == MessageKind::ReadReply ? msg.version : msg.seq;
  ops_.erase(it);
  // Replies to earlier attempts of this op may still arrive; forget them all.
  for (auto q = request_to_op_.begin(); q != request_to_op_.end();) {
    if (q->second == op_id) q = request_to_op_.erase(q);
    else ++q;
  }
  ++completed_;
  if (done_) done_(c);
  if (opts_.mode == LoopMode::Closed) begin_op();
}

void Client::on_timer(std::uint64_t tag) {
  if (tag == kTickTag) {
    begin_op();
    if (opts_.mode == LoopMode::Open && net_.now() + opts_.period < opts_.stop_at) {
      net_.set_timer(self_, opts_.period, kTickTag);
    }
    return;
  }
  std::uint64_t op_id = tag >> 1;
  auto it = ops_.find(op_id);
  if (it == ops_.end() || net_.now() < it->second.deadline) return;
  send_attempt(op_id);
}

}  // namespace harmonia::workload
