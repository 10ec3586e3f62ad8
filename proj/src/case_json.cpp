#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "gridctrl/errors.hpp"
#include "gridctrl/network.hpp"
#include "case_checks.hpp"

namespace gridctrl {

namespace {

using nlohmann::json;

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

template <typename T>
T field(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw InputError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const char* where) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, where);
}

const json& array_at(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) throw InputError(fmt::format("case: missing array '{}'", key));
  if (!it->is_array()) throw InputError(fmt::format("case: '{}' must be an array", key));
  return *it;
}

}  // namespace

namespace detail {

Network parse_json_case(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto [line, column] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError("syntax error in JSON case", line, column);
  }
  if (!doc.is_object()) throw ParseError("case must be a JSON object", 1, 1);

  Network net;
  net.base_mva = field<double>(doc, "base_mva", "case");
  if (!(net.base_mva > 0.0)) throw InputError("case: base_mva must be positive");

  for (const auto& b : array_at(doc, "buses")) {
    net.buses.push_back({field<int>(b, "id", "bus"), field_or<bool>(b, "is_slack", false, "bus")});
  }
  for (const auto& l : array_at(doc, "lines")) {
    Line line;
    line.id = field<int>(l, "id", "line");
    line.from_bus = field<int>(l, "from_bus", "line");
    line.to_bus = field<int>(l, "to_bus", "line");
    line.reactance = field<double>(l, "reactance", "line");
    auto lim = l.find("limit");
    if (lim != l.end() && !lim->is_null()) {
      if (lim->is_string()) {
        if (lim->get<std::string>() != "unlimited") throw InputError(fmt::format("line {}: limit must be a number or \"unlimited\"", line.id));
      } else if (lim->is_number()) {
        line.limit = lim->get<double>();
      } else {
        throw InputError(fmt::format("line {}: limit must be a number or \"unlimited\"", line.id));
      }
    }
    line.in_service = field_or<bool>(l, "in_service", true, "line");
    net.lines.push_back(line);
  }
  if (doc.contains("generators")) {
    for (const auto& g : array_at(doc, "generators")) {
      Generator gen;
      gen.bus = field<int>(g, "bus", "generator");
      gen.p_min = field<double>(g, "p_min", "generator");
      gen.p_max = field<double>(g, "p_max", "generator");
      auto cost = field_or<std::vector<double>>(g, "cost", {}, "generator");
      if (cost.size() > 3) throw InputError("generator: cost has more than three coefficients");
      for (std::size_t k = 0; k < cost.size(); ++k) gen.cost[k] = cost[k];
      net.generators.push_back(gen);
    }
  }
  if (doc.contains("loads")) {
    for (const auto& d : array_at(doc, "loads")) {
      net.loads.push_back({field<int>(d, "bus", "load"), field<double>(d, "p", "load")});
    }
  }
  check_parsed(net);
  return net;
}

}  // namespace detail

std::string to_json(const Network& net) {
  json doc;
  doc["base_mva"] = net.base_mva;
  doc["buses"] = json::array();
  for (const auto& b : net.buses) doc["buses"].push_back({{"id", b.id}, {"is_slack", b.is_slack}});
  doc["lines"] = json::array();
  for (const auto& l : net.lines) {
    json limit = l.limit ? json(*l.limit) : json("unlimited");
    doc["lines"].push_back({{"id", l.id},
                            {"from_bus", l.from_bus},
                            {"to_bus", l.to_bus},
                            {"reactance", l.reactance},
                            {"limit", limit},
                            {"in_service", l.in_service}});
  }
  doc["generators"] = json::array();
  for (const auto& g : net.generators) {
    doc["generators"].push_back({{"bus", g.bus},
                                 {"p_min", g.p_min},
                                 {"p_max", g.p_max},
                                 {"cost", {g.cost[0], g.cost[1], g.cost[2]}}});
  }
  doc["loads"] = json::array();
  for (const auto& d : net.loads) doc["loads"].push_back({{"bus", d.bus}, {"p", d.p}});
  return doc.dump(2) + "\n";
}

}  // namespace gridctrl
