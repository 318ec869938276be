#include <vector>

#include "doctest.h"
#include "harmonia/net/event_queue.hpp"
#include "harmonia/net/fault.hpp"
#include "harmonia/net/network.hpp"
#include "harmonia/store/replica_store.hpp"

using namespace harmonia;
using namespace harmonia::net;

namespace {

struct Recorder : Node {
  std::vector<std::pair<SimTime, Message>> got;
  std::vector<std::uint64_t> timers;
  Network* net = nullptr;
  void on_message(const Message& m) override { got.emplace_back(net->now(), m); }
  void on_timer(std::uint64_t tag) override { timers.push_back(tag); }
};

Message tagged(std::uint64_t id) {
  Message m;
  m.kind = MessageKind::Read;
  m.request_id = id;
  return m;
}

struct Pair {
  Network net;
  Recorder a, b;
  explicit Pair(NetConfig cfg) : net(std::move(cfg)) {
    a.net = b.net = &net;
    net.add_node(0, &a);
    net.add_node(1, &b);
  }
};

}  // namespace

TEST_CASE("event queue pops by time then insertion order") {
  EventQueue q;
  q.push(30, Timer{0, 1});
  q.push(10, Timer{0, 2});
  q.push(10, Timer{0, 3});
  q.push(20, Timer{0, 4});
  std::vector<std::uint64_t> tags;
  while (auto e = q.pop()) tags.push_back(std::get<Timer>(e->body).tag);
  CHECK(tags == std::vector<std::uint64_t>{2, 3, 4, 1});
  CHECK(q.now() == 30);
}

TEST_CASE("send: loss-free delivery at base delay") {
  Pair p(NetConfig{});
  p.net.send(tagged(1), 0, 1);
  p.net.run_until_quiescent(100);
  REQUIRE(p.b.got.size() == 1);
  CHECK(p.b.got[0].first == 5 * kMicrosecond);
  CHECK(p.b.got[0].second.src == 0);
  CHECK(p.b.got[0].second.dst == 1);
}

TEST_CASE("send: drop and duplicate probabilities of one") {
  NetConfig drop;
  drop.drop_prob = 1.0;
  Pair p(drop);
  p.net.send(tagged(1), 0, 1);
  p.net.run_until_quiescent(100);
  CHECK(p.b.got.empty());
  CHECK(p.net.stats().drops == 1);

  NetConfig dup;
  dup.duplicate_prob = 1.0;
  Pair q(dup);
  q.net.send(tagged(1), 0, 1);
  q.net.run_until_quiescent(100);
  CHECK(q.b.got.size() == 2);
}

TEST_CASE("send: jitter stays inside the configured band") {
  NetConfig cfg;
  cfg.jitter = 3 * kMicrosecond;
  Pair p(cfg);
  for (int i = 0; i < 500; ++i) p.net.send(tagged(i), 0, 1);
  p.net.run_until_quiescent(10'000);
  REQUIRE(p.b.got.size() == 500);
  bool varied = false;
  for (const auto& [t, m] : p.b.got) {
    CHECK(t >= 5 * kMicrosecond);
    CHECK(t <= 8 * kMicrosecond);
    varied |= t != p.b.got[0].first;
  }
  CHECK(varied);
}

TEST_CASE("adversarial reordering reverses sends within a window") {
  NetConfig cfg;
  cfg.adversarial_reorder = true;
  cfg.reorder_window = 20 * kMicrosecond;
  Pair p(cfg);
  p.net.at(1 * kMicrosecond, [&] { p.net.send(tagged(1), 0, 1); });
  p.net.at(2 * kMicrosecond, [&] { p.net.send(tagged(2), 0, 1); });
  p.net.at(3 * kMicrosecond, [&] { p.net.send(tagged(3), 0, 1); });
  p.net.run_until_quiescent(100);
  REQUIRE(p.b.got.size() == 3);
  CHECK(p.b.got[0].second.request_id == 3);
  CHECK(p.b.got[1].second.request_id == 2);
  CHECK(p.b.got[2].second.request_id == 1);
}

TEST_CASE("message conservation under loss and duplication") {
  NetConfig cfg;
  cfg.drop_prob = 0.2;
  cfg.duplicate_prob = 0.1;
  cfg.jitter = 2 * kMicrosecond;
  Pair p(cfg);
  for (int i = 0; i < 5000; ++i) p.net.send(tagged(i), i % 2, 1 - i % 2);
  p.net.run_until_quiescent(100'000);
  const auto& s = p.net.stats();
  CHECK(s.sends == 5000);
  CHECK(s.drops > 0);
  CHECK(s.duplicates > 0);
  CHECK(s.deliveries + s.dead_letters == s.sends - s.drops + s.duplicates);
  CHECK(p.a.got.size() + p.b.got.size() == s.deliveries);
}

TEST_CASE("crashed receivers swallow deliveries; crashed senders send nothing") {
  Pair p(NetConfig{});
  p.net.crash(1);
  p.net.send(tagged(1), 0, 1);
  p.net.send(tagged(2), 1, 0);
  p.net.run_until_quiescent(100);
  CHECK(p.b.got.empty());
  CHECK(p.a.got.empty());
  CHECK(p.net.stats().dead_letters == 1);
  p.net.recover(1);
  p.net.send(tagged(3), 0, 1);
  p.net.run_until_quiescent(100);
  CHECK(p.b.got.size() == 1);
}

TEST_CASE("partition blocks traffic across the cut during its interval") {
  Pair p(NetConfig{});
  p.net.partition(0, 10 * kMicrosecond, {1});
  p.net.send(tagged(1), 0, 1);
  p.net.at(20 * kMicrosecond, [&] { p.net.send(tagged(2), 0, 1); });
  p.net.run_until_quiescent(100);
  REQUIRE(p.b.got.size() == 1);
  CHECK(p.b.got[0].second.request_id == 2);
}

TEST_CASE("identical seeds give identical delivery sequences") {
  auto run = [](std::uint64_t seed) {
    NetConfig cfg;
    cfg.rng_seed = seed;
    cfg.drop_prob = 0.1;
    cfg.duplicate_prob = 0.1;
    cfg.jitter = 4 * kMicrosecond;
    cfg.adversarial_reorder = true;
    cfg.reorder_prob = 0.3;
    cfg.reorder_window = 10 * kMicrosecond;
    Pair p(cfg);
    for (int i = 0; i < 300; ++i) {
      p.net.at(i * 700, [&p, i] { p.net.send(tagged(i), 0, 1); });
    }
    p.net.run_until_quiescent(100'000);
    std::vector<std::pair<SimTime, std::uint64_t>> out;
    for (const auto& [t, m] : p.b.got) out.emplace_back(t, m.request_id);
    return out;
  };
  CHECK(run(3) == run(3));
  CHECK(run(3) != run(4));
}

TEST_CASE("run_until with a predicate and livelock guard") {
  Pair p(NetConfig{});
  p.net.set_timer(0, 10, 7);
  CHECK(p.net.run_until([&] { return !p.a.timers.empty(); }, 10));
  CHECK(p.a.timers == std::vector<std::uint64_t>{7});
  // A node that keeps rescheduling itself never quiesces.
  struct Ticker : Node {
    Network* net;
    void on_message(const Message&) override {}
    void on_timer(std::uint64_t) override { net->set_timer(2, 1, 0); }
  } t;
  t.net = &p.net;
  p.net.add_node(2, &t);
  p.net.set_timer(2, 1, 0);
  CHECK_THROWS_AS(p.net.run_until_quiescent(1000), LivelockError);
}

TEST_CASE("network config validation") {
  NetConfig bad;
  bad.drop_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  NetConfig neg;
  neg.base_delay = -1;
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}

TEST_CASE("fault entries parse and print") {
  auto c = parse_fault("crash-switch@20s");
  CHECK(c.kind == FaultEntry::Kind::CrashSwitch);
  CHECK(c.at == 20 * kSecond);
  auto a = parse_fault("activate-switch@25s id=2");
  CHECK(a.kind == FaultEntry::Kind::ActivateSwitch);
  CHECK(a.switch_id == 2);
  auto s = parse_fault("crash-server@1s node=1");
  CHECK(s.node == 1);
  auto part = parse_fault("partition@1s-2s nodes=0,1");
  CHECK(part.until == 2 * kSecond);
  CHECK(part.side == std::vector<NodeId>{0, 1});
  for (const auto* text : {"crash-switch@20s", "activate-switch@25s id=2", "crash-server@1s node=1",
                           "recover-server@2s node=1", "partition@1s-2s nodes=0,1"}) {
    auto e = parse_fault(text);
    auto again = parse_fault(to_string(e));
    CHECK(again.kind == e.kind);
    CHECK(again.at == e.at);
    CHECK(again.switch_id == e.switch_id);
    CHECK(again.node == e.node);
  }
  CHECK_THROWS_AS(parse_fault("explode@1s"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fault("activate-switch@1s"), std::invalid_argument);
}

TEST_CASE("fault schedules are validated and sorted") {
  auto ok = validate_schedule({parse_fault("activate-switch@25s id=2"), parse_fault("crash-switch@20s")}, 3);
  CHECK(ok.front().kind == FaultEntry::Kind::CrashSwitch);
  CHECK(validate_schedule({}, 3).empty());
  CHECK_THROWS_AS(validate_schedule({parse_fault("crash-server@1s node=1"),
                                     parse_fault("crash-server@2s node=1")}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({parse_fault("recover-server@1s node=1")}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({parse_fault("activate-switch@1s id=3"),
                                     parse_fault("activate-switch@2s id=2")}, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate_schedule({parse_fault("crash-server@1s node=5")}, 3),
                  std::invalid_argument);
}

TEST_CASE("replica store applies writes in strictly increasing order") {
  store::ReplicaStore st;
  auto w = [](std::uint64_t sid, std::uint64_t c, std::uint32_t o, const char* v) {
    return WriteRecord{SeqNum{sid, c}, ObjectId{o}, v};
  };
  auto fresh = st.read_local(ObjectId{1});
  CHECK_FALSE(fresh.value.has_value());
  CHECK(fresh.version == kBottomWrite);

  CHECK(st.apply_write(w(1, 3, 1, "x")) == store::ApplyResult::Applied);
  auto r = st.read_local(ObjectId{1});
  CHECK(r.value == "x");
  CHECK(r.version == SeqNum{1, 3});
  CHECK_FALSE(st.read_local(ObjectId{2}).value.has_value());

  CHECK(st.apply_write(w(1, 5, 2, "y")) == store::ApplyResult::Applied);
  CHECK(st.apply_write(w(1, 6, 2, "z")) == store::ApplyResult::Applied);
  CHECK(st.apply_write(w(1, 6, 2, "dup")) == store::ApplyResult::RejectedOutOfOrder);
  CHECK(st.apply_write(w(1, 4, 3, "old")) == store::ApplyResult::RejectedOutOfOrder);
  CHECK(st.read_local(ObjectId{2}).value == "z");
  for (int c = 7; c <= 9; ++c) st.apply_write(w(1, c, 4, "q"));
  CHECK(st.apply_write(w(2, 1, 4, "new switch")) == store::ApplyResult::Applied);
  CHECK(st.last_executed() == SeqNum{2, 1});
  CHECK(st.log().size() == 7);
}
