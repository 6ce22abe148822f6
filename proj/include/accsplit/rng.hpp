#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <vector>

namespace accsplit {

/// Seeded generator with distributions defined here rather than by the
/// standard library, so streams are identical across platforms.
///
/// Uniforms take the top 53 bits of mt19937_64; normals use the Box-Muller
/// transform (the second value of each pair is cached).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform on {0, ..., n-1} by rejection sampling. n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double mean = 0.0,
                                double stddev = 1.0);
  /// k distinct indices from {0, ..., n-1}, uniformly (partial Fisher-Yates),
  /// in the order drawn.
  std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace accsplit
