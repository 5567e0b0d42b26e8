#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "refbm/random.hpp"

namespace refbm {

/// Uniform time grid t_i = i * t_max / n_steps, i = 0..n_steps.
struct Grid {
  double t_max = 1.0;
  std::size_t n_steps = 1;

  Grid() = default;
  Grid(double horizon, std::size_t steps);

  double step() const { return t_max / static_cast<double>(n_steps); }
  double time(std::size_t i) const { return static_cast<double>(i) * step(); }
  std::size_t size() const { return n_steps + 1; }
};

/// The (H, gamma, c) triple of the drifted, gamma-reflected fBm model.
struct ModelParams {
  double hurst = 0.5;
  double gamma = 0.5;
  double drift = 1.0;

  /// Throws DomainError naming the offending field.
  void validate() const;
  /// Additionally requires gamma in the open interval (0,1).
  void validate_open_gamma() const;
};

/// A discretized realization of a one-parameter process on a uniform grid.
struct SamplePath {
  Grid grid;
  std::vector<double> values;
  double hurst = 0.5;
};

/// Cov(X_H(s), X_H(t)) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_cov(double s, double t, double hurst);

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocov(std::size_t lag, double hurst);

/// Exact sampler for a zero-mean stationary Gaussian sequence of length n with
/// autocovariance acov(k). Circulant embedding is used when the embedding is
/// nonnegative definite (relative tolerance 1e-10); otherwise a Cholesky
/// factor of the Toeplitz covariance is used.
class StationaryGaussianSampler {
public:
  enum class Method { circulant, cholesky };

  struct Options {
    double negative_eigen_tol = 1e-10;
    bool force_cholesky = false;
    /// Largest diagonal jitter the Cholesky fallback may add (0 = none).
    double max_jitter = 0.0;
  };

  /// Per-thread scratch buffers.
  class Workspace {
  public:
    Workspace();
    Workspace(Workspace&&) noexcept;
    Workspace& operator=(Workspace&&) noexcept;
    ~Workspace();

  private:
    friend class StationaryGaussianSampler;
    struct Impl;
    std::unique_ptr<Impl> impl_;
  };

  StationaryGaussianSampler(std::size_t n,
                            const std::function<double(std::size_t)>& acov);
  StationaryGaussianSampler(std::size_t n,
                            const std::function<double(std::size_t)>& acov,
                            Options options);

  std::size_t size() const { return n_; }
  Method method() const { return method_; }
  std::size_t embedding_size() const { return m_; }
  double jitter() const { return jitter_; }

  Workspace make_workspace() const;

  /// Fills two independent draws.
  void sample_pair(NormalStream& normals, Workspace& ws, std::span<double> a,
                   std::span<double> b) const;

private:
  struct Plan;

  void build_cholesky(const std::function<double(std::size_t)>& acov,
                      double max_jitter);

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  Method method_ = Method::circulant;
  double jitter_ = 0.0;
  std::vector<double> sqrt_eigen_;  // circulant: sqrt(lambda_k / m)
  std::vector<double> chol_;        // cholesky: row-major lower factor
  std::shared_ptr<Plan> plan_;
};

/// Exact fBm sampler on the lattice {k * step : k_lo <= k <= k_hi}, k_lo <= 0 <=
/// k_hi, pinned to B(0) = 0. Factorization happens once at construction; the
/// object is immutable afterwards and can be shared across threads.
class FbmSampler {
public:
  FbmSampler(double hurst, const Grid& grid);
  FbmSampler(double hurst, double step, long k_lo, long k_hi);
  FbmSampler(double hurst, double step, long k_lo, long k_hi,
             StationaryGaussianSampler::Options options);

  double hurst() const { return hurst_; }
  double step() const { return step_; }
  long k_lo() const { return k_lo_; }
  long k_hi() const { return k_hi_; }
  std::size_t size() const { return static_cast<std::size_t>(k_hi_ - k_lo_ + 1); }
  StationaryGaussianSampler::Method method() const { return noise_.method(); }

  StationaryGaussianSampler::Workspace make_workspace() const {
    return noise_.make_workspace();
  }

  /// Two independent paths; entry j is B((k_lo + j) * step).
  void sample_pair(NormalStream& normals, StationaryGaussianSampler::Workspace& ws,
                   std::span<double> a, std::span<double> b) const;

  /// Path on a Grid (k_lo == 0) from a single seed: the first of the pair.
  SamplePath sample(Seed seed) const;

private:
  void integrate(std::span<double> values) const;

  double hurst_;
  double step_;
  long k_lo_;
  long k_hi_;
  double scale_;
  StationaryGaussianSampler noise_;
};

/// One exact fBm path on `grid`, deterministic in `seed`.
SamplePath sample_fbm(double hurst, const Grid& grid, Seed seed);

/// Y_H(t) = X_H(t) - c t on `grid`.
SamplePath sample_drifted_input(const ModelParams& params, const Grid& grid,
                                Seed seed);

/// Subtracts c * t_i in place.
void apply_drift(SamplePath& path, double drift);

} // namespace refbm
