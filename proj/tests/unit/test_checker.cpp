#include "doctest.h"
#include "harmonia/checker/monitor.hpp"
#include "harmonia/checker/oracle.hpp"

using namespace harmonia;
using namespace harmonia::checker;

namespace {

WriteRecord wr(std::uint64_t c, std::uint32_t obj) { return {SeqNum{1, c}, ObjectId{obj}, "v"}; }

}  // namespace

TEST_CASE("oracle: committed prefix per mode") {
  Oracle ahead(Mode::ReadAhead, 3);
  Oracle behind(Mode::ReadBehind, 3);
  for (auto* o : {&ahead, &behind}) {
    o->record_decided(wr(1, 7));
    o->record_decided(wr(2, 8));
    o->record_decided(wr(3, 7));
    o->record_applied(0, 3);
    o->record_applied(1, 2);
    o->record_applied(2, 1);
  }
  CHECK(ahead.committed_length() == 1);
  CHECK(behind.committed_length() == 3);
  CHECK(ahead.max_committed_for(ObjectId{7}) == SeqNum{1, 1});
  CHECK(behind.max_committed_for(ObjectId{7}) == SeqNum{1, 3});
  CHECK(ahead.latest_decided_for(ObjectId{7}) == SeqNum{1, 3});
  CHECK(ahead.max_committed_for(ObjectId{99}) == kBottomWrite);
  CHECK(ahead.index_of({1, 2}) == 2u);
  CHECK_FALSE(ahead.is_committed({1, 2}));
  CHECK(behind.is_committed({1, 2}));

  // A replica leaving the membership no longer holds back the prefix.
  ahead.set_member(2, false);
  CHECK(ahead.committed_length() == 2);
  CHECK(ahead.member_count() == 2);
}

TEST_CASE("oracle rejects harness bugs") {
  Oracle o(Mode::ReadAhead, 2);
  o.record_decided(wr(5, 1));
  CHECK_THROWS_AS(o.record_decided(wr(5, 2)), std::logic_error);
  CHECK_THROWS_AS(o.record_decided(wr(4, 2)), std::logic_error);
  CHECK_THROWS_AS(o.record_applied(0, 2), std::logic_error);
  o.record_applied(0, 1);
  CHECK_THROWS_AS(o.record_applied(0, 0), std::logic_error);
}

TEST_CASE("monitor: ghost at issue time") {
  Oracle o(Mode::ReadAhead, 2);
  Monitor m(o);
  CHECK(m.on_read_issued(ObjectId{1}) == kBottomWrite);

  o.record_decided(wr(4, 1));
  o.record_applied(0, 1);
  o.record_applied(1, 1);
  CHECK(m.on_read_issued(ObjectId{1}) == SeqNum{1, 4});

  // Replica 0 runs ahead with (1,6); a read that returns it raises the
  // ghost above the committed maximum for every later read.
  o.record_decided(wr(6, 1));
  o.record_applied(0, 2);
  auto v = m.on_read_response(ObjectId{1}, {1, 6}, {1, 4});
  CHECK_FALSE(v.ok);
  CHECK(v.kind == ViolationKind::Integrity);
  CHECK(o.max_committed_for(ObjectId{1}) == SeqNum{1, 4});
  CHECK(m.on_read_issued(ObjectId{1}) == SeqNum{1, 6});
}

TEST_CASE("monitor: response verdicts") {
  Oracle o(Mode::ReadAhead, 2);
  Monitor m(o);
  CHECK(m.on_read_response(ObjectId{1}, kBottomWrite, kBottomWrite).ok);

  for (std::uint64_t c = 1; c <= 9; ++c) o.record_decided(wr(c, c == 4 || c == 6 || c == 9 ? 1 : 2));
  o.record_applied(0, 9);
  o.record_applied(1, 6);

  SUBCASE("uncommitted write leaked") {
    auto v = m.on_read_response(ObjectId{1}, {1, 9}, {1, 6});
    CHECK(v.kind == ViolationKind::Integrity);
  }
  SUBCASE("stale version") {
    auto v = m.on_read_response(ObjectId{1}, {1, 4}, {1, 6});
    CHECK(v.kind == ViolationKind::Visibility);
    REQUIRE(m.violation_count() == 1);
    CHECK(m.violations()[0].returned == SeqNum{1, 4});
    CHECK(m.violations()[0].ghost == SeqNum{1, 6});
  }
  SUBCASE("committed and fresh") {
    CHECK(m.on_read_response(ObjectId{1}, {1, 6}, {1, 6}).ok);
    CHECK(m.on_read_response(ObjectId{1}, {1, 6}, {1, 4}).ok);
  }
}

TEST_CASE("monitor: structural checks") {
  Oracle o(Mode::ReadAhead, 3);
  Monitor m(o);
  o.record_decided(wr(1, 1));
  o.record_decided(wr(2, 2));
  o.record_applied(0, 2);
  o.record_applied(1, 2);
  o.record_applied(2, 1);

  m.check_completion({1, 1}, 0);
  CHECK(m.violation_count() == 0);
  m.check_completion({1, 2}, 2);  // two replicas applied: fine for a quorum of 2
  CHECK(m.violation_count() == 0);
  m.check_completion({1, 2}, 0);  // replica 2 has not
  CHECK(m.violation_count() == 1);
  CHECK(m.violations().back().kind == ViolationKind::CompletionBeforeApply);

  m.check_removal(ObjectId{1}, {1, 1}, {1, 1});
  CHECK(m.violation_count() == 1);
  m.check_removal(ObjectId{1}, {1, 3}, {1, 2});
  CHECK(m.violations().back().kind == ViolationKind::RemovalAboveCommitted);

  m.check_fast_read(ObjectId{2}, true, {1, 1});
  CHECK(m.violation_count() == 2);
  m.check_fast_read(ObjectId{2}, false, {1, 2});
  CHECK(m.violation_count() == 2);
  m.check_fast_read(ObjectId{2}, false, {1, 1});
  CHECK(m.violations().back().kind == ViolationKind::UncoveredFastRead);

  auto report = m.final_sweep({{wr(1, 1), wr(2, 2)}, {wr(2, 2), wr(1, 1)}});
  CHECK(report.violations.back().kind == ViolationKind::UnorderedReplicaLog);
  CHECK_FALSE(report.ok());
  CHECK(report.to_json()["violations"].size() == report.violations.size());
  CHECK_FALSE(report.witness.empty());
}
