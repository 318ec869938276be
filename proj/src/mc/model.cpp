#include "harmonia/mc/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace harmonia::mc {

std::string_view to_string(Mutation m) {
  switch (m) {
    case Mutation::None: return "none";
    case Mutation::ReadAheadGateOff: return "read-ahead-gate-off";
    case Mutation::ReadBehindGateOff: return "read-behind-gate-off";
    case Mutation::StaleSwitchReads: return "stale-switch-reads";
  }
  return "?";
}

Mutation parse_mutation(std::string_view name) {
  for (Mutation m : {Mutation::None, Mutation::ReadAheadGateOff, Mutation::ReadBehindGateOff,
                     Mutation::StaleSwitchReads}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown mutation: " + std::string(name));
}

void McConfig::validate() const {
  auto in = [](int v, int lo, int hi, const char* what) {
    if (v < lo || v > hi) {
      throw std::invalid_argument(std::string(what) + " must be in [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
    }
  };
  in(data_items, 1, 16, "items");
  in(num_switches, 1, 16, "switches");
  in(replicas, 1, 16, "replicas");
  in(seq_bound, 1, 200, "seq bound");
  in(depth, 0, 200, "depth");
  if (state_budget == 0) throw std::invalid_argument("state budget must be positive");
}

bool gte(const W& a, const W& b) {
  return a.switch_num > b.switch_num || (a.switch_num == b.switch_num && a.seq >= b.seq);
}

bool gt(const W& a, const W& b) {
  return a.switch_num > b.switch_num || (a.switch_num == b.switch_num && a.seq > b.seq);
}

McState McState::init(const McConfig& cfg) {
  McState s;
  s.switches.resize(static_cast<std::size_t>(cfg.num_switches));
  for (auto& sw : s.switches) sw.dirty.assign(static_cast<std::size_t>(cfg.data_items), 0);
  s.active_switch = 1;
  s.commit_points.assign(static_cast<std::size_t>(cfg.replicas), 0);
  return s;
}

namespace {

void put(std::string& out, const W& w) {
  out.push_back(static_cast<char>(w.switch_num));
  out.push_back(static_cast<char>(w.seq));
  out.push_back(static_cast<char>(w.item));
}

struct Reader {
  std::string_view in;
  std::size_t pos = 0;

  std::uint8_t byte() {
    if (pos >= in.size()) throw std::invalid_argument("truncated state encoding");
    return static_cast<std::uint8_t>(in[pos++]);
  }
  W w() {
    W r;
    r.switch_num = byte();
    r.seq = byte();
    r.item = byte();
    return r;
  }
};

}  // namespace

std::string McState::encode() const {
  std::string out;
  out.reserve(8 + switches.size() * 8 + shared_log.size() * 3 + messages.size() * 9);
  out.push_back(static_cast<char>(active_switch));
  for (const auto& sw : switches) {
    out.push_back(static_cast<char>(sw.seq));
    for (auto d : sw.dirty) out.push_back(static_cast<char>(d));
    put(out, sw.last_committed);
  }
  for (auto cp : commit_points) out.push_back(static_cast<char>(cp));
  out.push_back(static_cast<char>(shared_log.size()));
  for (const auto& w : shared_log) put(out, w);
  out.push_back(static_cast<char>(messages.size() & 0xFF));
  out.push_back(static_cast<char>(messages.size() >> 8));
  for (const auto& m : messages) {
    out.push_back(static_cast<char>(m.type));
    out.push_back(static_cast<char>(m.item));
    out.push_back(static_cast<char>(m.switch_num));
    put(out, m.write);
    put(out, m.ghost);
  }
  return out;
}

McState McState::decode(std::string_view bytes, const McConfig& cfg) {
  Reader r{bytes};
  McState s;
  s.active_switch = r.byte();
  s.switches.resize(static_cast<std::size_t>(cfg.num_switches));
  for (auto& sw : s.switches) {
    sw.seq = r.byte();
    sw.dirty.resize(static_cast<std::size_t>(cfg.data_items));
    for (auto& d : sw.dirty) d = r.byte();
    sw.last_committed = r.w();
  }
  s.commit_points.resize(static_cast<std::size_t>(cfg.replicas));
  for (auto& cp : s.commit_points) cp = r.byte();
  s.shared_log.resize(r.byte());
  for (auto& w : s.shared_log) w = r.w();
  std::size_t n = r.byte();
  n |= static_cast<std::size_t>(r.byte()) << 8;
  s.messages.resize(n);
  for (auto& m : s.messages) {
    m.type = static_cast<MType>(r.byte());
    m.item = r.byte();
    m.switch_num = r.byte();
    m.write = r.w();
    m.ghost = r.w();
  }
  if (r.pos != bytes.size()) throw std::invalid_argument("trailing bytes in state encoding");
  return s;
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::SendWrite: return "SendWrite";
    case ActionKind::SendRead: return "SendRead";
    case ActionKind::ProcessWriteCompletion: return "ProcessWriteCompletion";
    case ActionKind::HandleWrite: return "HandleWrite";
    case ActionKind::HandleProtocolRead: return "HandleProtocolRead";
    case ActionKind::HandleHarmoniaRead: return "HandleHarmoniaRead";
    case ActionKind::CommitWrite: return "CommitWrite";
    case ActionKind::SwitchFailover: return "SwitchFailover";
  }
  return "?";
}

std::string_view to_string(Clause c) {
  return c == Clause::Visibility ? "visibility" : "integrity";
}

std::string to_string(const W& w) {
  if (w.is_bottom()) return "Bottom";
  return "(" + std::to_string(w.switch_num) + ":" + std::to_string(w.seq) + " d" +
         std::to_string(w.item) + ")";
}

std::string to_string(const Message& m) {
  switch (m.type) {
    case MType::Write:
      return "MWrite" + to_string(m.write);
    case MType::ProtocolRead:
      return "MProtocolRead[d" + std::to_string(m.item) + " ghost=" + to_string(m.ghost) + "]";
    case MType::HarmoniaRead:
      return "MHarmoniaRead[d" + std::to_string(m.item) + " sw=" + std::to_string(m.switch_num) +
             " lc=" + to_string(m.write) + " ghost=" + to_string(m.ghost) + "]";
    case MType::ReadResponse:
      return "MReadResponse[write=" + to_string(m.write) + " ghost=" + to_string(m.ghost) + "]";
  }
  return "?";
}

std::string to_string(const Action& a) {
  std::string out(to_string(a.kind));
  switch (a.kind) {
    case ActionKind::SendWrite:
    case ActionKind::SendRead:
      return out + "(s" + std::to_string(a.sw) + ", d" + std::to_string(a.item) + ")";
    case ActionKind::ProcessWriteCompletion:
      return out + to_string(a.write);
    case ActionKind::HandleWrite:
    case ActionKind::HandleProtocolRead:
      return out + "(" + to_string(a.message) + ")";
    case ActionKind::HandleHarmoniaRead:
      return out + "(r" + std::to_string(a.replica) + ", " + to_string(a.message) + ")";
    case ActionKind::CommitWrite:
      return out + "(r" + std::to_string(a.replica) + ")";
    case ActionKind::SwitchFailover:
      return out;
  }
  return out;
}

namespace {

W max_for_in(const std::vector<W>& log, std::size_t len, std::uint8_t item) {
  W best = kBottom;
  for (std::size_t i = 0; i < len; ++i) {
    if (log[i].item == item && gte(log[i], best)) best = log[i];
  }
  return best;
}

void send(McState& s, const Message& m) {
  auto it = std::lower_bound(s.messages.begin(), s.messages.end(), m);
  if (it == s.messages.end() || *it != m) s.messages.insert(it, m);
}

Message read_message(const McState& s, const McConfig& cfg, std::uint8_t sw, std::uint8_t item) {
  const SwitchState& st = s.switches[sw - 1];
  bool harmonia = st.dirty[item] == 0 && gt(st.last_committed, kBottom);

  W lr = max_committed_write_for(s, cfg, item);
  for (const auto& m : s.messages) {
    if (m.type == MType::ReadResponse && !m.write.is_bottom() && m.write.item == item &&
        gte(m.write, lr)) {
      lr = m.write;
    }
  }

  Message m;
  m.item = item;
  m.ghost = lr;
  if (harmonia) {
    m.type = MType::HarmoniaRead;
    m.switch_num = sw;
    m.write = st.last_committed;
  } else {
    m.type = MType::ProtocolRead;
  }
  return m;
}

bool harmonia_read_ok(const McState& s, const McConfig& cfg, std::uint8_t r, const Message& m) {
  if (cfg.mutation != Mutation::StaleSwitchReads && m.switch_num != s.active_switch) return false;
  std::uint8_t cp = s.commit_points[r];
  if (cfg.is_read_behind) {
    if (cfg.mutation == Mutation::ReadBehindGateOff) return true;
    W applied = cp > 0 ? s.shared_log[cp - 1] : kBottom;
    return gte(applied, m.write);
  }
  if (cfg.mutation == Mutation::ReadAheadGateOff) return true;
  return gte(m.write, max_for_in(s.shared_log, cp, m.item));
}

}  // namespace

std::size_t committed_length(const McState& s, const McConfig& cfg) {
  if (cfg.is_read_behind) return s.shared_log.size();
  return *std::min_element(s.commit_points.begin(), s.commit_points.end());
}

W max_committed_write_for(const McState& s, const McConfig& cfg, std::uint8_t item) {
  return max_for_in(s.shared_log, committed_length(s, cfg), item);
}

W max_committed_write(const McState& s, const McConfig& cfg) {
  W best = kBottom;
  std::size_t len = committed_length(s, cfg);
  for (std::size_t i = 0; i < len; ++i) {
    if (gte(s.shared_log[i], best)) best = s.shared_log[i];
  }
  return best;
}

bool is_enabled(const McState& s, const McConfig& cfg, const Action& a) {
  switch (a.kind) {
    case ActionKind::SendWrite:
      return a.sw >= 1 && a.sw <= cfg.num_switches && a.item < cfg.data_items &&
             a.sw <= s.active_switch && s.switches[a.sw - 1].seq < cfg.seq_bound;
    case ActionKind::SendRead:
      return a.sw >= 1 && a.sw <= cfg.num_switches && a.item < cfg.data_items;
    case ActionKind::ProcessWriteCompletion:
      return std::find(s.shared_log.begin(), s.shared_log.end(), a.write) != s.shared_log.end() &&
             gte(max_committed_write(s, cfg), a.write);
    case ActionKind::HandleWrite:
      return a.message.type == MType::Write &&
             std::binary_search(s.messages.begin(), s.messages.end(), a.message) &&
             (s.shared_log.empty() || gte(a.message.write, s.shared_log.back()));
    case ActionKind::HandleProtocolRead:
      return a.message.type == MType::ProtocolRead &&
             std::binary_search(s.messages.begin(), s.messages.end(), a.message);
    case ActionKind::HandleHarmoniaRead:
      return a.message.type == MType::HarmoniaRead && a.replica < cfg.replicas &&
             std::binary_search(s.messages.begin(), s.messages.end(), a.message) &&
             harmonia_read_ok(s, cfg, a.replica, a.message);
    case ActionKind::CommitWrite:
      return a.replica < cfg.replicas && s.shared_log.size() > s.commit_points[a.replica];
    case ActionKind::SwitchFailover:
      return s.active_switch < cfg.num_switches;
  }
  return false;
}

std::vector<Action> enabled_actions(const McState& s, const McConfig& cfg) {
  std::vector<Action> out;
  auto consider = [&](const Action& a) {
    if (is_enabled(s, cfg, a)) out.push_back(a);
  };

  for (int sw = 1; sw <= cfg.num_switches; ++sw) {
    for (int d = 0; d < cfg.data_items; ++d) {
      Action a;
      a.sw = static_cast<std::uint8_t>(sw);
      a.item = static_cast<std::uint8_t>(d);
      a.kind = ActionKind::SendWrite;
      consider(a);
      a.kind = ActionKind::SendRead;
      consider(a);
    }
  }

  std::vector<W> seen;
  for (const auto& w : s.shared_log) {
    if (std::find(seen.begin(), seen.end(), w) != seen.end()) continue;
    seen.push_back(w);
    Action a;
    a.kind = ActionKind::ProcessWriteCompletion;
    a.write = w;
    consider(a);
  }

  for (const auto& m : s.messages) {
    Action a;
    a.message = m;
    switch (m.type) {
      case MType::Write:
        a.kind = ActionKind::HandleWrite;
        consider(a);
        break;
      case MType::ProtocolRead:
        a.kind = ActionKind::HandleProtocolRead;
        consider(a);
        break;
      case MType::HarmoniaRead:
        a.kind = ActionKind::HandleHarmoniaRead;
        for (int r = 0; r < cfg.replicas; ++r) {
          a.replica = static_cast<std::uint8_t>(r);
          consider(a);
        }
        break;
      case MType::ReadResponse:
        break;
    }
  }

  for (int r = 0; r < cfg.replicas; ++r) {
    Action a;
    a.kind = ActionKind::CommitWrite;
    a.replica = static_cast<std::uint8_t>(r);
    consider(a);
  }

  Action f;
  f.kind = ActionKind::SwitchFailover;
  consider(f);
  return out;
}

McState apply(const McState& s, const McConfig& cfg, const Action& a) {
  if (!is_enabled(s, cfg, a)) throw std::logic_error("action not enabled: " + to_string(a));
  McState n = s;
  switch (a.kind) {
    case ActionKind::SendWrite: {
      SwitchState& st = n.switches[a.sw - 1];
      std::uint8_t next = static_cast<std::uint8_t>(st.seq + 1);
      st.seq = next;
      st.dirty[a.item] = next;
      Message m;
      m.type = MType::Write;
      m.item = a.item;
      m.write = W{a.sw, next, a.item};
      send(n, m);
      break;
    }
    case ActionKind::SendRead:
      send(n, read_message(s, cfg, a.sw, a.item));
      break;
    case ActionKind::ProcessWriteCompletion: {
      SwitchState& st = n.switches[a.write.switch_num - 1];
      for (auto& d : st.dirty) {
        if (d != 0 && d <= a.write.seq) d = 0;
      }
      if (gte(a.write, st.last_committed)) st.last_committed = a.write;
      break;
    }
    case ActionKind::HandleWrite:
      n.shared_log.push_back(a.message.write);
      break;
    case ActionKind::HandleProtocolRead: {
      Message r;
      r.type = MType::ReadResponse;
      r.write = max_committed_write_for(s, cfg, a.message.item);
      r.ghost = a.message.ghost;
      send(n, r);
      break;
    }
    case ActionKind::HandleHarmoniaRead: {
      Message r;
      r.type = MType::ReadResponse;
      r.write = max_for_in(s.shared_log, s.commit_points[a.replica], a.message.item);
      r.ghost = a.message.ghost;
      send(n, r);
      break;
    }
    case ActionKind::CommitWrite:
      ++n.commit_points[a.replica];
      break;
    case ActionKind::SwitchFailover:
      ++n.active_switch;
      break;
  }
  return n;
}

CheckResult check(const McState& s, const McConfig& cfg) {
  std::size_t len = committed_length(s, cfg);
  for (const auto& m : s.messages) {
    if (m.type != MType::ReadResponse) continue;
    if (!gte(m.write, m.ghost)) return {false, Clause::Visibility, m};
    if (m.write.is_bottom()) continue;
    auto end = s.shared_log.begin() + static_cast<std::ptrdiff_t>(len);
    if (std::find(s.shared_log.begin(), end, m.write) == end) return {false, Clause::Integrity, m};
  }
  return {};
}

std::vector<std::string> diff(const McState& before, const McState& after) {
  std::vector<std::string> out;
  if (before.active_switch != after.active_switch) {
    out.push_back("activeSwitch: " + std::to_string(before.active_switch) + " -> " +
                  std::to_string(after.active_switch));
  }
  for (std::size_t i = 0; i < after.switches.size(); ++i) {
    const auto& b = before.switches[i];
    const auto& a = after.switches[i];
    std::string who = "switch " + std::to_string(i + 1);
    if (b.seq != a.seq) {
      out.push_back(who + " seq: " + std::to_string(b.seq) + " -> " + std::to_string(a.seq));
    }
    for (std::size_t d = 0; d < a.dirty.size(); ++d) {
      if (b.dirty[d] == a.dirty[d]) continue;
      if (a.dirty[d] == 0) {
        out.push_back(who + " dirtySet: remove d" + std::to_string(d));
      } else {
        out.push_back(who + " dirtySet: d" + std::to_string(d) + " -> " +
                      std::to_string(a.dirty[d]));
      }
    }
    if (b.last_committed != a.last_committed) {
      out.push_back(who + " lastCommitted: " + to_string(b.last_committed) + " -> " +
                    to_string(a.last_committed));
    }
  }
  for (std::size_t i = before.shared_log.size(); i < after.shared_log.size(); ++i) {
    out.push_back("sharedLog: append " + to_string(after.shared_log[i]));
  }
  for (std::size_t r = 0; r < after.commit_points.size(); ++r) {
    if (before.commit_points[r] != after.commit_points[r]) {
      out.push_back("replica " + std::to_string(r) + " commit point: " +
                    std::to_string(before.commit_points[r]) + " -> " +
                    std::to_string(after.commit_points[r]));
    }
  }
  for (const auto& m : after.messages) {
    if (!std::binary_search(before.messages.begin(), before.messages.end(), m)) {
      out.push_back("send " + to_string(m));
    }
  }
  if (out.empty()) out.push_back("(no change)");
  return out;
}

std::string describe(const McState& s) {
  std::string out = "activeSwitch=" + std::to_string(s.active_switch) + "\n";
  for (std::size_t i = 0; i < s.switches.size(); ++i) {
    const auto& sw = s.switches[i];
    out += "switch " + std::to_string(i + 1) + ": seq=" + std::to_string(sw.seq) + " dirty={";
    bool first = true;
    for (std::size_t d = 0; d < sw.dirty.size(); ++d) {
      if (sw.dirty[d] == 0) continue;
      out += (first ? "" : ", ") + ("d" + std::to_string(d)) + ":" + std::to_string(sw.dirty[d]);
      first = false;
    }
    out += "} lastCommitted=" + to_string(sw.last_committed) + "\n";
  }
  out += "sharedLog=[";
  for (std::size_t i = 0; i < s.shared_log.size(); ++i) {
    out += (i ? ", " : "") + to_string(s.shared_log[i]);
  }
  out += "]\ncommitPoints=[";
  for (std::size_t r = 0; r < s.commit_points.size(); ++r) {
    out += (r ? ", " : "") + std::to_string(s.commit_points[r]);
  }
  out += "]\nmessages:\n";
  for (const auto& m : s.messages) out += "  " + to_string(m) + "\n";
  return out;
}

}  // namespace harmonia::mc
