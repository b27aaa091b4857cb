#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace flagcheck {

// Seeded random stream. Streams are split hierarchically from a master seed
// via derive(), so each (instance, purpose) gets an independent stream and
// results do not depend on scheduling or worker count. All sampling goes
// through explicit uniform draws (Box-Muller for gaussians) so output is
// pinned by this code alone, not by library distribution internals.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  // Child stream keyed by a path of words, e.g. derive(master, {instance, 3}).
  static RngStream derive(std::uint64_t root, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();
  double uniform();                       // [0, 1)
  double uniform_positive();              // (0, 1]
  double gaussian();                      // N(0, 1)
  std::complex<double> complex_gaussian();  // re, im each N(0, 1)
  std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)

  std::vector<std::size_t> permutation(std::size_t n);
  std::vector<double> dirichlet(std::size_t n);  // flat Dirichlet weights

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 mixing step, also used for instance digests.
std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t mix_words(std::uint64_t a, std::uint64_t b);

}  // namespace flagcheck
