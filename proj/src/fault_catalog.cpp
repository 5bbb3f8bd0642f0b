#include <algorithm>

#include "tinycompress/data.hpp"

namespace tc::data {

std::string_view to_string(FaultType type) noexcept {
  switch (type) {
    case FaultType::none: return "None";
    case FaultType::step: return "Step";
    case FaultType::random_variation: return "Random variation";
    case FaultType::slow_drift: return "Slow drift";
    case FaultType::sticking: return "Sticking";
    case FaultType::unknown: return "Unknown";
  }
  return "Unknown";
}

const std::array<FaultInfo, kFaultCount>& fault_catalog() noexcept {
  static const std::array<FaultInfo, kFaultCount> catalog = {{
      {0, "Normal operation", FaultType::none, false},
      {1, "A/C feed ratio, B composition constant (stream 4)", FaultType::step, false},
      {2, "B composition, A/C ratio constant (stream 4)", FaultType::step, false},
      {3, "D feed temperature (stream 2)", FaultType::step, true},
      {4, "Reactor cooling water inlet temperature", FaultType::step, false},
      {5, "Condenser cooling water inlet temperature", FaultType::step, false},
      {6, "A feed loss (stream 1)", FaultType::step, false},
      {7, "C header pressure loss - reduced availability (stream 4)", FaultType::step, false},
      {8, "A, B, C feed composition (stream 4)", FaultType::random_variation, false},
      {9, "D feed temperature (stream 2)", FaultType::random_variation, true},
      {10, "C feed temperature (stream 4)", FaultType::random_variation, false},
      {11, "Reactor cooling water inlet temperature", FaultType::random_variation, false},
      {12, "Condenser cooling water inlet temperature", FaultType::random_variation, false},
      {13, "Reaction kinetics", FaultType::slow_drift, false},
      {14, "Reactor cooling water valve", FaultType::sticking, false},
      {15, "Condenser cooling water valve", FaultType::sticking, true},
      {16, "Unknown", FaultType::unknown, false},
      {17, "Unknown", FaultType::unknown, false},
      {18, "Unknown", FaultType::unknown, false},
      {19, "Unknown", FaultType::unknown, false},
      {20, "Unknown", FaultType::unknown, false},
  }};
  return catalog;
}

bool is_excluded(int fault) noexcept {
  return fault >= 0 && fault < kFaultCount && fault_catalog()[static_cast<std::size_t>(fault)].excluded;
}

std::vector<int> included_faults() {
  std::vector<int> out;
  for (const auto& f : fault_catalog())
    if (!f.excluded) out.push_back(f.number);
  return out;
}

}  // namespace tc::data
