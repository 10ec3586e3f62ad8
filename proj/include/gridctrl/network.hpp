#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridctrl {

struct Bus {
  int id = 0;
  bool is_slack = false;

  bool operator==(const Bus&) const = default;
};

// Power quantities on the data model are in MW; reactance is per unit on
// the network base. Conversion to per unit happens where the math starts.
struct Line {
  int id = 0;
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;
  std::optional<double> limit;  // MW, nullopt = unlimited
  bool in_service = true;

  bool operator==(const Line&) const = default;
};

struct Generator {
  int bus = 0;
  double p_min = 0.0;
  double p_max = 0.0;
  // $/h = cost[0] + cost[1] * P + cost[2] * P^2, P in MW.
  std::array<double, 3> cost{0.0, 0.0, 0.0};

  double cost_at(double p_mw) const { return cost[0] + (cost[1] + cost[2] * p_mw) * p_mw; }

  bool operator==(const Generator&) const = default;
};

struct Load {
  int bus = 0;
  double p = 0.0;

  bool operator==(const Load&) const = default;
};

struct Network {
  double base_mva = 100.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<Load> loads;

  bool operator==(const Network&) const = default;

  int num_buses() const { return static_cast<int>(buses.size()); }

  // Position of a bus in `buses`; throws InputError for unknown ids.
  int bus_index(int bus_id) const;
  std::optional<int> find_bus(int bus_id) const;
  // Position of a line in `lines`; throws InputError for unknown ids.
  int line_index(int line_id) const;
  int slack_index() const;

  // Lines taking part in the DC model, in file order.
  std::vector<int> in_service_lines() const;

  // Net MW withdrawal per bus from the loads.
  std::vector<double> load_per_bus() const;
  double total_load() const;
};

enum class CaseFormat { Json, Matpower };

// Parse a case from text. Syntax errors carry line/column; missing slack,
// duplicate ids and non-positive reactance are rejected here.
Network parse_case(std::string_view text, CaseFormat format);
Network load_case(const std::string& path);
CaseFormat format_from_path(const std::string& path);

// Native JSON text for `net`, deterministic and lossless.
std::string to_json(const Network& net);

struct Violation {
  enum class Kind {
    SlackCount,
    DuplicateBus,
    DuplicateLine,
    DanglingReference,
    SelfLoop,
    BadReactance,
    BadLimit,
    BadGenerator,
    BadLoad,
    Disconnected,
  };
  Kind kind;
  std::string message;
  std::vector<int> buses;  // buses involved, when meaningful
};

std::string_view to_string(Violation::Kind kind);

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Network& net);

// Same network with every group of parallel in-service lines replaced by one
// equivalent line (susceptances and limits summed). The equivalent takes the
// smallest id in its group and the orientation of the first line listed.
Network merge_parallel_lines(const Network& net);

// Components of the graph over in-service lines, as lists of bus indices.
std::vector<std::vector<int>> connected_components(const Network& net);
bool is_connected(const Network& net);

}  // namespace gridctrl
