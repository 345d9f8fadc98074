#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ghzw/common.hpp"

namespace ghzw {

// A chosen subset of the equiangular x-y-plane measurement directions
// theta_j = pi*j/N, j in {0, ..., N-1}. Indices are kept sorted strictly
// increasing.
struct SettingSet {
  int n_parties = 0;
  std::vector<int> indices;

  int size() const { return static_cast<int>(indices.size()); }
};

inline void validate(const SettingSet& s) {
  require(s.n_parties >= 2, "setting set requires at least 2 parties");
  require(!s.indices.empty(), "setting set must be nonempty");
  for (std::size_t i = 0; i < s.indices.size(); ++i) {
    require(s.indices[i] >= 0 && s.indices[i] < s.n_parties,
            "setting index " + std::to_string(s.indices[i]) +
                " outside [0, " + std::to_string(s.n_parties - 1) + "]");
    if (i > 0)
      require(s.indices[i] > s.indices[i - 1],
              "setting indices must be strictly increasing");
  }
}

inline SettingSet make_setting_set(int n_parties, std::vector<int> indices) {
  std::sort(indices.begin(), indices.end());
  SettingSet s{n_parties, std::move(indices)};
  validate(s);
  return s;
}

// Measurement direction of index j, theta = pi*j/N.
inline double setting_angle(int j, int n_parties) {
  return kPi * j / n_parties;
}

inline void require_weight_in_range(const SettingSet& s, double c_weight) {
  const int m = s.size();
  require(c_weight >= m && c_weight <= 2.0 * m,
          "C = " + std::to_string(c_weight) + " violates |S| <= C <= 2|S| (|S| = " +
              std::to_string(m) + ")");
}

}  // namespace ghzw
