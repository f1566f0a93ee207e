#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "mgip/graph.hpp"

namespace mgip::testing {

inline std::filesystem::path data_dir() { return std::filesystem::path(MGIP_SOURCE_DIR) / "data"; }
inline std::filesystem::path config_dir() { return std::filesystem::path(MGIP_SOURCE_DIR) / "configs"; }

inline MetricGraph interval(double length = 1.0) {
  return MetricGraph({{"l", 0.0, 0.0}, {"r", length, 0.0}}, {{"e0", "l", "r", std::nullopt}});
}

/// Three unit edges meeting at the center vertex "c".
inline MetricGraph star3() { return load_graph(data_dir() / "star3.json"); }

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mgip_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace mgip::testing
