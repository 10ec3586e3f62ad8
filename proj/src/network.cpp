#include "gridctrl/network.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "gridctrl/errors.hpp"

namespace gridctrl {

std::optional<int> Network::find_bus(int bus_id) const {
  for (int i = 0; i < num_buses(); ++i) {
    if (buses[i].id == bus_id) return i;
  }
  return std::nullopt;
}

int Network::bus_index(int bus_id) const {
  if (auto idx = find_bus(bus_id)) return *idx;
  throw InputError(fmt::format("unknown bus {}", bus_id));
}

int Network::line_index(int line_id) const {
  for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
    if (lines[i].id == line_id) return i;
  }
  throw InputError(fmt::format("unknown line {}", line_id));
}

int Network::slack_index() const {
  int found = -1;
  for (int i = 0; i < num_buses(); ++i) {
    if (!buses[i].is_slack) continue;
    if (found >= 0) throw InputError("more than one slack bus");
    found = i;
  }
  if (found < 0) throw InputError("no slack bus");
  return found;
}

std::vector<int> Network::in_service_lines() const {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
    if (lines[i].in_service) out.push_back(i);
  }
  return out;
}

std::vector<double> Network::load_per_bus() const {
  std::vector<double> out(buses.size(), 0.0);
  for (const auto& load : loads) out[bus_index(load.bus)] += load.p;
  return out;
}

double Network::total_load() const {
  double sum = 0.0;
  for (const auto& load : loads) sum += load.p;
  return sum;
}

CaseFormat format_from_path(const std::string& path) {
  if (path.size() >= 2 && path.compare(path.size() - 2, 2, ".m") == 0) return CaseFormat::Matpower;
  return CaseFormat::Json;
}

Network load_case(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot read {}", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_case(buf.str(), format_from_path(path));
}

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::SlackCount: return "slack_count";
    case Violation::Kind::DuplicateBus: return "duplicate_bus";
    case Violation::Kind::DuplicateLine: return "duplicate_line";
    case Violation::Kind::DanglingReference: return "dangling_reference";
    case Violation::Kind::SelfLoop: return "self_loop";
    case Violation::Kind::BadReactance: return "bad_reactance";
    case Violation::Kind::BadLimit: return "bad_limit";
    case Violation::Kind::BadGenerator: return "bad_generator";
    case Violation::Kind::BadLoad: return "bad_load";
    case Violation::Kind::Disconnected: return "disconnected";
  }
  return "unknown";
}

namespace {

struct DisjointSet {
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(int a, int b) { parent[find(a)] = find(b); }
  std::vector<int> parent;
};

}  // namespace

std::vector<std::vector<int>> connected_components(const Network& net) {
  const int n = net.num_buses();
  DisjointSet sets(n);
  for (const auto& line : net.lines) {
    if (!line.in_service) continue;
    auto a = net.find_bus(line.from_bus);
    auto b = net.find_bus(line.to_bus);
    if (a && b) sets.join(*a, *b);
  }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[sets.find(i)].push_back(i);
  std::vector<std::vector<int>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

bool is_connected(const Network& net) { return connected_components(net).size() <= 1; }

ValidationReport validate(const Network& net) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, std::string msg, std::vector<int> buses = {}) {
    report.violations.push_back({kind, std::move(msg), std::move(buses)});
  };

  std::set<int> bus_ids;
  int slack_count = 0;
  for (const auto& bus : net.buses) {
    if (!bus_ids.insert(bus.id).second) add(Violation::Kind::DuplicateBus, fmt::format("bus id {} repeated", bus.id), {bus.id});
    if (bus.is_slack) ++slack_count;
  }
  if (slack_count != 1) add(Violation::Kind::SlackCount, fmt::format("expected exactly one slack bus, found {}", slack_count));

  std::set<int> line_ids;
  for (const auto& line : net.lines) {
    if (!line_ids.insert(line.id).second) add(Violation::Kind::DuplicateLine, fmt::format("line id {} repeated", line.id));
    for (int end : {line.from_bus, line.to_bus}) {
      if (!bus_ids.count(end)) add(Violation::Kind::DanglingReference, fmt::format("line {} references unknown bus {}", line.id, end), {end});
    }
    if (line.from_bus == line.to_bus) add(Violation::Kind::SelfLoop, fmt::format("line {} connects bus {} to itself", line.id, line.from_bus), {line.from_bus});
    if (!(line.reactance > 0.0)) add(Violation::Kind::BadReactance, fmt::format("line {} has non-positive reactance {}", line.id, line.reactance));
    if (line.limit && !(*line.limit > 0.0)) add(Violation::Kind::BadLimit, fmt::format("line {} has non-positive limit {}", line.id, *line.limit));
  }

  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const auto& gen = net.generators[g];
    if (!bus_ids.count(gen.bus)) add(Violation::Kind::DanglingReference, fmt::format("generator {} references unknown bus {}", g, gen.bus), {gen.bus});
    if (gen.p_min > gen.p_max) add(Violation::Kind::BadGenerator, fmt::format("generator {} has p_min > p_max", g));
    if (gen.cost[2] < 0.0) add(Violation::Kind::BadGenerator, fmt::format("generator {} has a negative quadratic cost", g));
  }
  for (std::size_t l = 0; l < net.loads.size(); ++l) {
    const auto& load = net.loads[l];
    if (!bus_ids.count(load.bus)) add(Violation::Kind::DanglingReference, fmt::format("load {} references unknown bus {}", l, load.bus), {load.bus});
    if (load.p < 0.0) add(Violation::Kind::BadLoad, fmt::format("load {} has negative demand", l));
  }

  auto components = connected_components(net);
  if (components.size() > 1) {
    // Report every bus outside the component holding the slack (or the
    // largest component when there is no unique slack).
    std::size_t main = 0;
    for (std::size_t c = 0; c < components.size(); ++c) {
      if (components[c].size() > components[main].size()) main = c;
    }
    for (std::size_t c = 0; c < components.size(); ++c) {
      for (int b : components[c]) {
        if (net.buses[b].is_slack) main = c;
      }
    }
    std::vector<int> cut;
    for (std::size_t c = 0; c < components.size(); ++c) {
      if (c == main) continue;
      for (int b : components[c]) cut.push_back(net.buses[b].id);
    }
    std::sort(cut.begin(), cut.end());
    std::string names;
    for (int id : cut) names += (names.empty() ? "" : ",") + std::to_string(id);
    add(Violation::Kind::Disconnected, fmt::format("buses not connected to the main island: {}", names), cut);
  }
  return report;
}

Network merge_parallel_lines(const Network& net) {
  Network out = net;
  out.lines.clear();
  std::map<std::pair<int, int>, std::size_t> slot;
  for (const auto& line : net.lines) {
    if (!line.in_service) {
      out.lines.push_back(line);
      continue;
    }
    auto key = std::minmax(line.from_bus, line.to_bus);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, out.lines.size());
      out.lines.push_back(line);
      continue;
    }
    Line& eq = out.lines[it->second];
    eq.reactance = 1.0 / (1.0 / eq.reactance + 1.0 / line.reactance);
    if (eq.limit && line.limit) {
      eq.limit = *eq.limit + *line.limit;
    } else {
      eq.limit.reset();
    }
    eq.id = std::min(eq.id, line.id);
  }
  return out;
}

}  // namespace gridctrl
