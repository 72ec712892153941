#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "ragnar/panel.hpp"
#include "ragnar/year_month.hpp"

namespace ragnar::testing {

/// Panel over the given matrix (rows = months from `start`), ids N0, N1, ...
inline Panel make_panel(const Eigen::MatrixXd& values, YearMonth start = {2000, 1}, int target = 0) {
  Panel p;
  for (Eigen::Index i = 0; i < values.cols(); ++i) p.series.push_back({"N" + std::to_string(i), "", HierarchyLevel::unknown});
  for (Eigen::Index t = 0; t < values.rows(); ++t) p.dates.push_back(start + static_cast<int>(t));
  p.values = values;
  p.target = target;
  return p;
}

inline std::string fixture_dir() { return RAGNAR_FIXTURE_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("ragnar_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// True when every file below `a` exists below `b` with identical bytes, and
/// vice versa.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  auto files = [](const fs::path& root) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto fa = files(a), fb = files(b);
  if (fa != fb) return false;
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return false;
  return true;
}

}  // namespace ragnar::testing
