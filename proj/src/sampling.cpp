#include "nastab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>

namespace nastab {

struct SobolStream::Impl {
  explicit Impl(std::size_t dim) : engine(dim) {}
  boost::random::sobol engine;
};

SobolStream::SobolStream(std::size_t dim, std::uint64_t seed)
    : dim_(dim), impl_(std::make_unique<Impl>(dim)) {
  // Skip the all-zero point, then jump to this seed's block of 2^20 points.
  impl_->engine.discard(dim * (1 + seed * (std::uint64_t{1} << 20)));
}

SobolStream::~SobolStream() = default;

void SobolStream::next(std::span<double> u) {
  using Engine = boost::random::sobol;
  constexpr double scale =
      1.0 / (static_cast<double>((Engine::max)() - (Engine::min)()) + 1.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    u[i] = static_cast<double>(impl_->engine() - (Engine::min)()) * scale;
  }
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SampleSet sample_region(const SamplingPlan& plan, int n, double half_width,
                        std::size_t candidates,
                        const std::function<bool(std::span<const double>)>& accept) {
  SampleSet out;
  out.n = n;
  const auto un = static_cast<std::size_t>(n);
  SobolStream stream(un + 1, plan.seed);
  std::vector<double> u(un + 1), x(un);
  for (std::size_t k = 0; k < candidates && out.size() < plan.samples; ++k) {
    stream.next(u);
    for (std::size_t i = 0; i < un; ++i) {
      x[i] = half_width * (2.0 * u[i + 1] - 1.0);
    }
    if (!accept(x)) continue;
    out.t.push_back(plan.T_check * u[0]);
    out.x.insert(out.x.end(), x.begin(), x.end());
  }
  return out;
}

SampleSet sample_time_state(const SamplingPlan& plan, int n, double radius) {
  // The ball's share of the cube shrinks quickly with n.
  const std::size_t candidates = plan.samples * (n <= 2 ? 4 : 64);
  return sample_region(plan, n, radius, candidates,
                       [&](std::span<const double> x) {
                         const double r = norm(x);
                         return r <= radius && r >= plan.exclusion_radius;
                       });
}

std::size_t default_direction_count(int n) {
  return n == 2 ? 41 : static_cast<std::size_t>(20 * n);
}

std::vector<std::vector<double>> sphere_directions(int n, std::size_t count,
                                                   std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  if (n == 1) {
    dirs = {{1.0}, {-1.0}};
    return dirs;
  }
  if (n == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(count);
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  const auto un = static_cast<std::size_t>(n);
  SobolStream stream(un, seed);
  std::vector<double> u(un);
  while (dirs.size() < count) {
    stream.next(u);
    std::vector<double> d(un);
    for (std::size_t i = 0; i < un; ++i) {
      const double p = std::clamp(u[i], 1e-12, 1.0 - 1e-12);
      d[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
    }
    const double r = norm(d);
    if (r < 1e-12) continue;
    for (double& v : d) v /= r;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(1u, threads), count);
  if (workers == 1) {
    body(0, count);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace nastab
