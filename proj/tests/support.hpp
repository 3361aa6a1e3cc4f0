#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "pedk/nn/tensor.hpp"
#include "pedk/rng.hpp"

namespace pedk::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pedk-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

template <typename Scalar>
nn::Tensor<Scalar> random_tensor(nn::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  nn::Tensor<Scalar> t(std::move(shape));
  for (nn::Index i = 0; i < t.size(); ++i) t[i] = static_cast<Scalar>(rng.uniform(lo, hi));
  return t;
}

}  // namespace pedk::test
