#include <algorithm>
#include <sstream>
#include <string>

#include "doctest.h"
#include "harmonia/harness/simulation.hpp"
#include "harmonia/protocols/gates.hpp"
#include "nlohmann/json.hpp"

using namespace harmonia;
using namespace harmonia::protocols;
using harmonia::harness::RunConfig;

namespace {

// Exactly one client write (the priming write) on a loss-free network.
RunConfig one_write(Protocol p, std::size_t n, bool harmonia) {
  RunConfig c;
  c.protocol.protocol = p;
  c.protocol.replicas = n;
  c.protocol.harmonia = harmonia;
  c.workload.clients = 0;
  c.duration = 2 * kMillisecond;
  c.warmup = 0;
  return c;
}

std::vector<nlohmann::json> trace_events(const std::string& trace) {
  std::vector<nlohmann::json> out;
  std::istringstream in(trace);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace

TEST_CASE("read-ahead gate") {
  CHECK(gate_read_ahead({1, 9}, {1, 9}) == GateDecision::ServeLocal);
  CHECK(gate_read_ahead({1, 8}, {1, 9}) == GateDecision::ForwardNormal);
  CHECK(gate_read_ahead(kBottomWrite, kBottomWrite) == GateDecision::ServeLocal);
  CHECK(gate_read_ahead({3, 1}, kBottomWrite) == GateDecision::ServeLocal);
  CHECK(gate_read_ahead({1, 99}, {2, 1}) == GateDecision::ForwardNormal);
}

TEST_CASE("read-behind gate") {
  CHECK(gate_read_behind({1, 7}, {1, 7}) == GateDecision::ServeLocal);
  CHECK(gate_read_behind({1, 9}, {1, 7}) == GateDecision::ForwardNormal);
  CHECK(gate_read_behind(kBottomWrite, kBottomWrite) == GateDecision::ServeLocal);
  CHECK(gate_read_behind(kBottomWrite, {1, 3}) == GateDecision::ServeLocal);
}

TEST_CASE("lease state") {
  LeaseState l;
  l.tick(0, 10 * kMillisecond);
  CHECK(l.permits(1, 5 * kMillisecond));
  CHECK_FALSE(l.permits(1, 10 * kMillisecond));  // expired
  CHECK_FALSE(l.permits(2, 5 * kMillisecond));   // not the lease holder

  CHECK(l.refuse_below(2, kMillisecond, 10 * kMillisecond));
  CHECK_FALSE(l.permits(1, 2 * kMillisecond));
  CHECK(l.permits(2, 2 * kMillisecond));
  // A smaller id can never win the lease back.
  CHECK_FALSE(l.refuse_below(1, 3 * kMillisecond, 10 * kMillisecond));
  CHECK(l.current_switch_id == 2);
  CHECK(l.refuse_below(3, 4 * kMillisecond, 10 * kMillisecond));
  CHECK_FALSE(l.permits(2, 5 * kMillisecond));
}

TEST_CASE("completion policy parsing") {
  CHECK(parse_completion_policy("quorum").kind == CompletionDelay::Quorum);
  CHECK(parse_completion_policy("all").kind == CompletionDelay::All);
  auto t = parse_completion_policy("ms:2");
  CHECK(t.kind == CompletionDelay::Timeout);
  CHECK(t.timeout == 2 * kMillisecond);
  CHECK(to_string(t) == "ms:2");
  CHECK_THROWS_AS(parse_completion_policy("soon"), std::invalid_argument);
}

TEST_CASE("protocol config validation") {
  ProtocolConfig c;
  c.replicas = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  ProtocolConfig craq;
  craq.protocol = Protocol::Craq;
  CHECK_THROWS_AS(craq.validate(), std::invalid_argument);  // Harmonia defaults to on
  CHECK(ProtocolConfig{}.quorum() == 2);
}

TEST_CASE("write-path message counts in loss-free runs") {
  for (std::size_t n : {2u, 3u, 5u}) {
    CAPTURE(n);
    const std::uint64_t f = n - 1;
    {  // primary-backup
      auto r = harness::run(one_write(Protocol::PrimaryBackup, n, true));
      const auto& m = r.metrics.messages;
      CHECK(m.of(MessageKind::StateUpdate) == f);
      CHECK(m.of(MessageKind::StateUpdateAck) == f);
      CHECK(m.of(MessageKind::WriteReply) == 1);
      CHECK(m.of(MessageKind::WriteCompletion) == 1);
      CHECK(m.write_path() == 2 * f + 2);
    }
    {  // chain
      auto r = harness::run(one_write(Protocol::Chain, n, true));
      const auto& m = r.metrics.messages;
      CHECK(m.of(MessageKind::ChainForward) == f);
      CHECK(m.of(MessageKind::WriteReply) == 1);
      CHECK(m.of(MessageKind::WriteCompletion) == 1);
      CHECK(m.write_path() == f + 2);
    }
    {  // craq
      auto r = harness::run(one_write(Protocol::Craq, n, false));
      const auto& m = r.metrics.messages;
      CHECK(m.of(MessageKind::CraqDirtyMark) == f);
      CHECK(m.of(MessageKind::CraqCommit) == f);
      CHECK(m.of(MessageKind::WriteCompletion) == 0);
      CHECK(m.write_path() == 2 * f + 1);
      // Counting the switch-to-head write as well.
      CHECK(m.write_path() + 1 == 2 * f + 2);
    }
    if (n >= 3) {  // viewstamped
      auto on = harness::run(one_write(Protocol::Viewstamped, n, true));
      const auto& m = on.metrics.messages;
      CHECK(m.of(MessageKind::Prepare) == f);
      CHECK(m.of(MessageKind::PrepareOk) == f);
      CHECK(m.of(MessageKind::Commit) == f);
      CHECK(m.of(MessageKind::CommitAck) == f);
      CHECK(m.write_path() == 4 * f + 2);
      auto off = harness::run(one_write(Protocol::Viewstamped, n, false));
      CHECK(off.metrics.messages.of(MessageKind::CommitAck) == 0);
      CHECK(off.metrics.messages.of(MessageKind::WriteCompletion) == 0);
      CHECK(off.metrics.messages.write_path() == 3 * f + 1);
    }
    {  // Harmonia off drops only the completion
      auto on = harness::run(one_write(Protocol::Chain, n, true));
      auto off = harness::run(one_write(Protocol::Chain, n, false));
      CHECK(off.metrics.messages.of(MessageKind::WriteCompletion) == 0);
      CHECK(on.metrics.messages.write_path() == off.metrics.messages.write_path() + 1);
    }
  }
}

TEST_CASE("viewstamped completion waits for commit acks and follows the reply") {
  auto cfg = one_write(Protocol::Viewstamped, 3, true);
  auto r = harness::run(cfg, {true});
  auto events = trace_events(r.trace);
  std::int64_t completion_at = -1, reply_at = -1;
  for (const auto& e : events) {
    if (e["ev"] != "send") continue;
    if (e["kind"] == "WriteCompletion" && completion_at < 0) completion_at = e["t"];
    if (e["kind"] == "WriteReply" && reply_at < 0) reply_at = e["t"];
  }
  REQUIRE(completion_at >= 0);
  REQUIRE(reply_at >= 0);
  CHECK(reply_at <= completion_at);
  int acks_before = 0;
  for (const auto& e : events) {
    if (e["ev"] == "recv" && e["kind"] == "CommitAck" && e["t"].get<std::int64_t>() <= completion_at) {
      ++acks_before;
    }
  }
  CHECK(acks_before >= 2);
}

TEST_CASE("a follower cut off from commits never acknowledges them") {
  auto cfg = one_write(Protocol::Viewstamped, 3, true);
  cfg.faults = {net::parse_fault("partition@0us-2ms nodes=2")};
  auto r = harness::run(cfg, {true});
  for (const auto& e : trace_events(r.trace)) {
    if (e["ev"] == "send" && e["kind"] == "CommitAck") CHECK(e["src"] != 2);
  }
  // With every live replica required, the completion never goes out.
  CHECK(r.metrics.messages.of(MessageKind::WriteCompletion) == 0);
  CHECK(r.ok());
}

TEST_CASE("primary-backup: a lost update delays the completion until retransmission") {
  auto cfg = one_write(Protocol::PrimaryBackup, 3, true);
  cfg.protocol.retransmit = 500 * kMicrosecond;
  cfg.faults = {net::parse_fault("partition@0us-200us nodes=1")};
  auto r = harness::run(cfg, {true});
  std::int64_t completion_at = -1;
  for (const auto& e : trace_events(r.trace)) {
    if (e["ev"] == "send" && (e["kind"] == "WriteCompletion" || e["kind"] == "WriteReply")) {
      completion_at = e["t"];
      break;
    }
  }
  CHECK(completion_at >= 500 * kMicrosecond);
  CHECK(r.metrics.messages.retransmissions >= 1);
  CHECK(r.ok());
}

TEST_CASE("normal-path reads: chain tail only, CRAQ any replica") {
  RunConfig c;
  c.protocol.replicas = 3;
  c.workload.write_ratio = 0;
  c.workload.clients = 32;
  c.duration = 3 * kMillisecond;
  c.warmup = 0;
  c.client_timeout = 2 * kMillisecond;

  c.protocol.protocol = Protocol::Chain;
  c.protocol.harmonia = false;
  auto cr = harness::run(c);
  REQUIRE(cr.metrics.replica_reads.size() == 3);
  CHECK(cr.metrics.replica_reads[0] == 0);
  CHECK(cr.metrics.replica_reads[1] == 0);
  CHECK(cr.metrics.replica_reads[2] > 0);

  c.protocol.protocol = Protocol::Craq;
  auto craq = harness::run(c);
  for (auto reads : craq.metrics.replica_reads) CHECK(reads > 0);
  CHECK(craq.ok());
}

TEST_CASE("fast-path reads spread evenly over replicas") {
  RunConfig c;
  c.protocol.protocol = Protocol::Chain;
  c.protocol.replicas = 3;
  c.workload.write_ratio = 0;
  c.workload.clients = 128;
  c.duration = 40 * kMillisecond;
  c.warmup = 0;
  c.client_timeout = 2 * kMillisecond;
  auto r = harness::run(c);
  const auto& reads = r.metrics.replica_reads;
  auto [lo, hi] = std::minmax_element(reads.begin(), reads.end());
  std::uint64_t total = 0;
  for (auto x : reads) total += x;
  REQUIRE(total >= 100'000);
  CHECK(static_cast<double>(*hi) / static_cast<double>(*lo) <= 1.1);
  CHECK(r.ok());
}
