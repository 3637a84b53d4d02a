#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

namespace bargain {

// All money is integer cents.
using Cents = std::int64_t;

constexpr double to_dollars(Cents c) { return static_cast<double>(c) / 100.0; }

// "12.00", "-0.20"
inline std::string format_dollars(Cents c) {
  const Cents mag = c < 0 ? -c : c;
  std::string cents = std::to_string(mag % 100);
  if (cents.size() < 2) cents.insert(0, "0");
  return (c < 0 ? "-" : "") + std::to_string(mag / 100) + "." + cents;
}

// "+1.10", "-0.20", "+0.00"
inline std::string format_signed_dollars(Cents c) {
  return (c < 0 ? "" : "+") + format_dollars(c);
}

}  // namespace bargain
