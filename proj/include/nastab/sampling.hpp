#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace nastab {

/// Where and how densely certificate inequalities are probed.
struct SamplingPlan {
  std::size_t samples = 100'000;
  double T_check = 100.0;
  /// Points with |x| below this radius are skipped (V1, V2, V3 vanish at 0).
  double exclusion_radius = 1e-6;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Flat store of sampled (t, x) points in deterministic sequence order.
struct SampleSet {
  int n = 0;
  std::vector<double> t;
  std::vector<double> x;  // size() * n, row-major

  std::size_t size() const { return t.size(); }
  std::span<const double> state(std::size_t i) const {
    return {x.data() + i * static_cast<std::size_t>(n),
            static_cast<std::size_t>(n)};
  }
};

/// Scrambling-free Sobol points in [0,1)^dim. The origin is skipped and
/// `seed` selects a disjoint block of the sequence.
class SobolStream {
 public:
  SobolStream(std::size_t dim, std::uint64_t seed);
  ~SobolStream();
  SobolStream(const SobolStream&) = delete;
  SobolStream& operator=(const SobolStream&) = delete;

  void next(std::span<double> u);
  std::size_t dimension() const { return dim_; }

 private:
  struct Impl;
  std::size_t dim_;
  std::unique_ptr<Impl> impl_;
};

/// Low-discrepancy (t, x) points with t in [0, plan.T_check] and x in the
/// ball of radius `radius` minus the exclusion ball, by rejection from the
/// enclosing cube. Returns at most plan.samples points.
SampleSet sample_time_state(const SamplingPlan& plan, int n, double radius);

/// Like sample_time_state, but keeps the candidates from the cube
/// [-half_width, half_width]^n that satisfy `accept`. Stops after
/// `candidates` draws.
SampleSet sample_region(const SamplingPlan& plan, int n, double half_width,
                        std::size_t candidates,
                        const std::function<bool(std::span<const double>)>& accept);

/// Unit vectors: {+1, -1} in 1-D, equally spaced angles in 2-D, and
/// normalized inverse-normal Sobol points in higher dimensions.
std::vector<std::vector<double>> sphere_directions(int n, std::size_t count,
                                                   std::uint64_t seed = 0);

/// Default direction count: 41 in 2-D, 20 n otherwise.
std::size_t default_direction_count(int n);

/// Runs body(begin, end) over [0, count) in contiguous chunks on up to
/// `threads` workers. Exceptions from workers are rethrown.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nastab
