#include "harmonia/net/event_queue.hpp"

#include <stdexcept>

namespace harmonia::net {

void EventQueue::push(SimTime at, std::variant<Delivery, Timer, Callback> body) {
  if (at < now_) throw std::logic_error("event scheduled in the past");
  heap_.push(Event{at, next_order_++, std::move(body)});
}

std::optional<Event> EventQueue::pop() {
  if (heap_.empty()) return std::nullopt;
  // priority_queue::top is const; the event is copied out before pop.
  Event e = std::move(const_cast<Event&>(heap_.top()));
  heap_.pop();
  now_ = e.at;
  return e;
}

std::optional<SimTime> EventQueue::next_time() const {
  if (heap_.empty()) return std::nullopt;
  return heap_.top().at;
}

}  // namespace harmonia::net
