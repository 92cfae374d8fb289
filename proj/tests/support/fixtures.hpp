#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "msdhmm/skeleton.hpp"

namespace testing_support {

// Scratch directory removed when the object goes out of scope.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("msdhmm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline msdhmm::SkeletonFrame random_frame(std::size_t joints, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  msdhmm::SkeletonFrame f;
  f.joints.resize(joints);
  f.valid.assign(joints, true);
  for (auto& j : f.joints) {
    j.x = u(rng);
    j.y = u(rng);
    j.z = 2.0 + u(rng);
  }
  return f;
}

}  // namespace testing_support
