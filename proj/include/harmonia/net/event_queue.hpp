#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "harmonia/core/message.hpp"

namespace harmonia::net {

struct Delivery {
  Message msg;
};

struct Timer {
  NodeId node = kNoNode;
  std::uint64_t tag = 0;
};

struct Callback {
  std::function<void()> fn;
};

struct Event {
  SimTime at = 0;
  std::uint64_t order = 0;  // insertion index, breaks ties deterministically
  std::variant<Delivery, Timer, Callback> body;
};

// Pending events ordered by (deliver time, insertion index).
class EventQueue {
 public:
  void push(SimTime at, std::variant<Delivery, Timer, Callback> body);

  // Pops the earliest event and advances now() to its time.
  std::optional<Event> pop();

  SimTime now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  std::optional<SimTime> next_time() const;

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      return a.order > b.order;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_order_ = 0;
  SimTime now_ = 0;
};

}  // namespace harmonia::net
