#include "harmonia/net/fault.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "harmonia/core/duration.hpp"
#include "harmonia/net/network.hpp"

namespace harmonia::net {

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint64_t parse_uint(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer in fault entry: " + s);
  }
  if (pos != s.size()) throw std::invalid_argument("bad integer in fault entry: " + s);
  return v;
}

}  // namespace

FaultEntry parse_fault(std::string_view text) {
  auto words = split(text, ' ');
  if (words.empty()) throw std::invalid_argument("empty fault entry");
  auto at = words[0].find('@');
  if (at == std::string::npos) throw std::invalid_argument("fault entry needs kind@time");
  std::string kind = words[0].substr(0, at);
  std::string when = words[0].substr(at + 1);

  FaultEntry e;
  if (kind == "crash-switch") e.kind = FaultEntry::Kind::CrashSwitch;
  else if (kind == "activate-switch") e.kind = FaultEntry::Kind::ActivateSwitch;
  else if (kind == "crash-server") e.kind = FaultEntry::Kind::CrashServer;
  else if (kind == "recover-server") e.kind = FaultEntry::Kind::RecoverServer;
  else if (kind == "partition") e.kind = FaultEntry::Kind::Partition;
  else throw std::invalid_argument("unknown fault kind: " + kind);

  if (e.kind == FaultEntry::Kind::Partition) {
    auto dash = when.find('-');
    if (dash == std::string::npos) throw std::invalid_argument("partition needs from-until");
    e.at = parse_duration(when.substr(0, dash));
    e.until = parse_duration(when.substr(dash + 1));
  } else {
    e.at = parse_duration(when);
  }

  for (std::size_t i = 1; i < words.size(); ++i) {
    auto eq = words[i].find('=');
    if (eq == std::string::npos) throw std::invalid_argument("fault option needs key=value");
    std::string key = words[i].substr(0, eq);
    std::string val = words[i].substr(eq + 1);
    if (key == "id") e.switch_id = parse_uint(val);
    else if (key == "node") e.node = static_cast<NodeId>(parse_uint(val));
    else if (key == "nodes") {
      for (const auto& n : split(val, ',')) e.side.push_back(static_cast<NodeId>(parse_uint(n)));
    } else {
      throw std::invalid_argument("unknown fault option: " + key);
    }
  }

  switch (e.kind) {
    case FaultEntry::Kind::ActivateSwitch:
      if (e.switch_id == 0) throw std::invalid_argument("activate-switch needs id>=1");
      break;
    case FaultEntry::Kind::CrashServer:
    case FaultEntry::Kind::RecoverServer:
      if (e.node == kNoNode) throw std::invalid_argument(kind + " needs node=");
      break;
    default:
      break;
  }
  return e;
}

std::string to_string(const FaultEntry& e) {
  std::ostringstream os;
  switch (e.kind) {
    case FaultEntry::Kind::CrashSwitch:
      os << "crash-switch@" << format_duration(e.at);
      break;
    case FaultEntry::Kind::ActivateSwitch:
      os << "activate-switch@" << format_duration(e.at) << " id=" << e.switch_id;
      break;
    case FaultEntry::Kind::CrashServer:
      os << "crash-server@" << format_duration(e.at) << " node=" << e.node;
      break;
    case FaultEntry::Kind::RecoverServer:
      os << "recover-server@" << format_duration(e.at) << " node=" << e.node;
      break;
    case FaultEntry::Kind::Partition: {
      os << "partition@" << format_duration(e.at) << "-" << format_duration(e.until) << " nodes=";
      for (std::size_t i = 0; i < e.side.size(); ++i) os << (i ? "," : "") << e.side[i];
      break;
    }
  }
  return os.str();
}

std::vector<FaultEntry> validate_schedule(std::vector<FaultEntry> entries, std::size_t replicas) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const FaultEntry& a, const FaultEntry& b) { return a.at < b.at; });
  std::set<NodeId> down;
  bool switch_up = true;
  std::uint64_t last_switch = 1;
  for (const auto& e : entries) {
    switch (e.kind) {
      case FaultEntry::Kind::CrashSwitch:
        if (!switch_up) throw std::invalid_argument("crash-switch while no switch is active");
        switch_up = false;
        break;
      case FaultEntry::Kind::ActivateSwitch:
        if (e.switch_id <= last_switch) {
          throw std::invalid_argument("activate-switch ids must increase (got " +
                                      std::to_string(e.switch_id) + ")");
        }
        last_switch = e.switch_id;
        switch_up = true;
        break;
      case FaultEntry::Kind::CrashServer:
        if (e.node >= replicas) throw std::invalid_argument("crash-server node out of range");
        if (!down.insert(e.node).second) {
          throw std::invalid_argument("crash-server on an already crashed node");
        }
        break;
      case FaultEntry::Kind::RecoverServer:
        if (e.node >= replicas) throw std::invalid_argument("recover-server node out of range");
        if (down.erase(e.node) == 0) {
          throw std::invalid_argument("recover-server on a node that is not crashed");
        }
        break;
      case FaultEntry::Kind::Partition:
        if (e.until <= e.at) throw std::invalid_argument("partition must end after it starts");
        if (e.side.empty()) throw std::invalid_argument("partition needs nodes=");
        for (NodeId n : e.side) {
          if (n >= replicas) throw std::invalid_argument("partition node out of range");
        }
        break;
    }
  }
  if (down.size() >= replicas && replicas > 0) {
    throw std::invalid_argument("schedule leaves no replica alive");
  }
  return entries;
}

void inject_fault(Network& net, const FaultEntry& entry, FaultHandler handler) {
  net.at(entry.at, [entry, handler = std::move(handler)] { handler(entry); });
}

}  // namespace harmonia::net
