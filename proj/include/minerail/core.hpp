#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace minerail {

/// Raised on schema violations and invariant failures in input documents.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an internal invariant is broken (model/solver defect).
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// Discretization of the planning window into instants of g minutes.
struct TimeGrid {
  int instant_len_min = 5;   // g
  int horizon_instants = 2;  // |Q|

  void validate() const {
    if (instant_len_min <= 0 || 60 % instant_len_min != 0)
      throw ValidationError("grid: instant_len_min must be positive and divide 60");
    if (horizon_instants < 2)
      throw ValidationError("grid: horizon_instants must be >= 2");
  }

  /// Travel minutes -> instants, rounded up so travel time is never underestimated.
  int instants(double minutes) const {
    int d = static_cast<int>(std::ceil(minutes / instant_len_min - 1e-9));
    return d;
  }
};

/// Split `total` instants into `parts` integer shares by largest remainder,
/// each at least 1. Shares sum to max(total, parts).
inline std::vector<int> apportion_instants(int total, int parts) {
  if (parts <= 0) throw InternalError("apportion_instants: parts must be positive");
  std::vector<int> out(parts, 0);
  double share = static_cast<double>(total) / parts;
  int assigned = 0;
  for (int i = 0; i < parts; ++i) {
    out[i] = static_cast<int>(std::floor(share));
    assigned += out[i];
  }
  // Largest remainder is identical across equal shares; hand the leftover
  // instants to the earliest segments for a deterministic result.
  for (int i = 0; assigned < total; ++i, ++assigned) out[i % parts] += 1;
  for (auto& v : out)
    if (v < 1) v = 1;
  return out;
}

}  // namespace minerail
