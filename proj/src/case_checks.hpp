#pragma once

#include <set>
#include <string_view>

#include <fmt/format.h>

#include "gridctrl/errors.hpp"
#include "gridctrl/network.hpp"

namespace gridctrl::detail {

Network parse_json_case(std::string_view text);
Network parse_matpower_case(std::string_view text);

// Hard errors at load time. Everything else is left to validate().
inline void check_parsed(const Network& net) {
  std::set<int> ids;
  int slacks = 0;
  for (const auto& b : net.buses) {
    if (!ids.insert(b.id).second) throw InputError(fmt::format("duplicate bus id {}", b.id));
    slacks += b.is_slack ? 1 : 0;
  }
  if (slacks == 0) throw InputError("missing slack bus");
  if (slacks > 1) throw InputError(fmt::format("{} slack buses, expected one", slacks));
  std::set<int> line_ids;
  for (const auto& l : net.lines) {
    if (!line_ids.insert(l.id).second) throw InputError(fmt::format("duplicate line id {}", l.id));
    if (!(l.reactance > 0.0)) throw InputError(fmt::format("line {} has non-positive reactance {}", l.id, l.reactance));
  }
}

}  // namespace gridctrl::detail
