#include "refbm/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fftw3.h>

#include "refbm/errors.hpp"

namespace refbm {

namespace {

// FFTW planning and plan destruction are not thread-safe; execution with the
// new-array interface is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex, FftwFree>;

FftwBuffer alloc_complex(std::size_t m) {
  auto* p = fftw_alloc_complex(m);
  if (p == nullptr) throw SamplingError("fftw_alloc_complex failed");
  return FftwBuffer(p);
}

bool is_smooth(std::size_t x) {
  for (std::size_t f : {2u, 3u, 5u})
    while (x % f == 0) x /= f;
  return x == 1;
}

std::size_t smooth_at_least(std::size_t x) {
  if (x <= 1) return 1;
  while (!is_smooth(x)) ++x;
  return x;
}

void check_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw DomainError("hurst must lie in (0,1), got " + std::to_string(hurst));
}

} // namespace

// ---------------------------------------------------------------------------

Grid::Grid(double horizon, std::size_t steps) : t_max(horizon), n_steps(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw DomainError("grid horizon must be positive and finite");
  if (steps < 1) throw DomainError("grid needs at least one step");
}

void ModelParams::validate() const {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw DomainError("hurst must lie in (0,1), got " + std::to_string(hurst));
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("gamma must lie in [0,1], got " + std::to_string(gamma));
  if (!(drift > 0.0) || !std::isfinite(drift))
    throw DomainError("drift c must be positive, got " + std::to_string(drift));
}

void ModelParams::validate_open_gamma() const {
  validate();
  if (!(gamma > 0.0 && gamma < 1.0))
    throw DomainError("gamma must lie in (0,1) for conditional passage results, got " +
                      std::to_string(gamma));
}

double fbm_cov(double s, double t, double hurst) {
  check_hurst(hurst);
  if (s < 0.0 || t < 0.0) throw DomainError("fbm_cov needs s,t >= 0");
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double fgn_autocov(std::size_t lag, double hurst) {
  const double h2 = 2.0 * hurst;
  const double k = static_cast<double>(lag);
  if (lag == 0) return 1.0;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

// ---------------------------------------------------------------------------

struct StationaryGaussianSampler::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan != nullptr) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

struct StationaryGaussianSampler::Workspace::Impl {
  FftwBuffer buffer;
  std::vector<double> z;
};

StationaryGaussianSampler::Workspace::Workspace() : impl_(std::make_unique<Impl>()) {}
StationaryGaussianSampler::Workspace::Workspace(Workspace&&) noexcept = default;
StationaryGaussianSampler::Workspace&
StationaryGaussianSampler::Workspace::operator=(Workspace&&) noexcept = default;
StationaryGaussianSampler::Workspace::~Workspace() = default;

StationaryGaussianSampler::StationaryGaussianSampler(
    std::size_t n, const std::function<double(std::size_t)>& acov)
    : StationaryGaussianSampler(n, acov, Options{}) {}

StationaryGaussianSampler::StationaryGaussianSampler(
    std::size_t n, const std::function<double(std::size_t)>& acov, Options options)
    : n_(n) {
  if (n == 0) throw DomainError("stationary sampler needs n >= 1");

  if (!options.force_cholesky) {
    m_ = smooth_at_least(n > 1 ? 2 * (n - 1) : 1);
    auto buf = alloc_complex(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t lag = std::min(j, m_ - j);
      buf.get()[j][0] = acov(lag);
      buf.get()[j][1] = 0.0;
    }
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_plan p = fftw_plan_dft_1d(static_cast<int>(m_), buf.get(), buf.get(),
                                     FFTW_FORWARD, FFTW_ESTIMATE);
      fftw_execute(p);
      fftw_destroy_plan(p);
    }
    double max_eig = 0.0;
    double min_eig = 0.0;
    for (std::size_t k = 0; k < m_; ++k) {
      max_eig = std::max(max_eig, buf.get()[k][0]);
      min_eig = std::min(min_eig, buf.get()[k][0]);
    }
    if (max_eig > 0.0 && min_eig >= -options.negative_eigen_tol * max_eig) {
      method_ = Method::circulant;
      sqrt_eigen_.resize(m_);
      const double md = static_cast<double>(m_);
      for (std::size_t k = 0; k < m_; ++k)
        sqrt_eigen_[k] = std::sqrt(std::max(buf.get()[k][0], 0.0) / md);

      auto work = alloc_complex(m_);
      plan_ = std::make_shared<Plan>();
      std::lock_guard lock(fftw_planner_mutex());
      plan_->plan = fftw_plan_dft_1d(static_cast<int>(m_), work.get(), work.get(),
                                     FFTW_FORWARD, FFTW_ESTIMATE);
      return;
    }
  }
  build_cholesky(acov, options.max_jitter);
}

void StationaryGaussianSampler::build_cholesky(
    const std::function<double(std::size_t)>& acov, double max_jitter) {
  method_ = Method::cholesky;
  m_ = n_;
  Eigen::MatrixXd cov(n_, n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = acov(i - j);

  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd a = cov;
    if (jitter > 0.0) a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      chol_.assign(n_ * n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j) chol_[i * n_ + j] = l(i, j);
      jitter_ = jitter;
      return;
    }
    if (max_jitter <= 0.0 || jitter >= max_jitter)
      throw SamplingError("covariance matrix is not positive definite (n=" +
                          std::to_string(n_) + ")");
    jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
  }
}

StationaryGaussianSampler::Workspace StationaryGaussianSampler::make_workspace() const {
  Workspace ws;
  if (method_ == Method::circulant) ws.impl_->buffer = alloc_complex(m_);
  ws.impl_->z.resize(method_ == Method::circulant ? 0 : n_);
  return ws;
}

void StationaryGaussianSampler::sample_pair(NormalStream& normals, Workspace& ws,
                                            std::span<double> a,
                                            std::span<double> b) const {
  if (a.size() < n_ || b.size() < n_)
    throw DomainError("sample_pair output spans are too short");

  if (method_ == Method::circulant) {
    fftw_complex* buf = ws.impl_->buffer.get();
    for (std::size_t k = 0; k < m_; ++k) {
      const double re = normals.next();
      const double im = normals.next();
      buf[k][0] = sqrt_eigen_[k] * re;
      buf[k][1] = sqrt_eigen_[k] * im;
    }
    fftw_execute_dft(plan_->plan, buf, buf);
    for (std::size_t j = 0; j < n_; ++j) {
      a[j] = buf[j][0];
      b[j] = buf[j][1];
    }
    return;
  }

  auto& z = ws.impl_->z;
  for (std::span<double> out : {a, b}) {
    normals.fill(z);
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = chol_.data() + i * n_;
      double acc = 0.0;
      for (std::size_t j = 0; j <= i; ++j) acc += row[j] * z[j];
      out[i] = acc;
    }
  }
}

// ---------------------------------------------------------------------------

FbmSampler::FbmSampler(double hurst, const Grid& grid)
    : FbmSampler(hurst, grid.step(), 0, static_cast<long>(grid.n_steps)) {}

FbmSampler::FbmSampler(double hurst, double step, long k_lo, long k_hi)
    : FbmSampler(hurst, step, k_lo, k_hi, StationaryGaussianSampler::Options{}) {}

FbmSampler::FbmSampler(double hurst, double step, long k_lo, long k_hi,
                       StationaryGaussianSampler::Options options)
    : hurst_((check_hurst(hurst), hurst)),
      step_(step),
      k_lo_(k_lo),
      k_hi_(k_hi),
      scale_(std::pow(step, hurst)),
      noise_(static_cast<std::size_t>(std::max(k_hi - k_lo, 1L)),
             [hurst](std::size_t k) { return fgn_autocov(k, hurst); }, options) {
  if (!(step > 0.0)) throw DomainError("lattice step must be positive");
  if (k_lo > 0 || k_hi < 0) throw DomainError("lattice must contain the origin");
}

void FbmSampler::integrate(std::span<double> values) const {
  // values[1..] hold increments on entry; cumulate and pin the origin.
  const std::size_t count = size();
  values[0] = 0.0;
  for (std::size_t j = 1; j < count; ++j) values[j] = values[j - 1] + scale_ * values[j];
  const auto origin = static_cast<std::size_t>(-k_lo_);
  const double offset = values[origin];
  if (offset != 0.0)
    for (std::size_t j = 0; j < count; ++j) values[j] -= offset;
}

void FbmSampler::sample_pair(NormalStream& normals,
                             StationaryGaussianSampler::Workspace& ws,
                             std::span<double> a, std::span<double> b) const {
  const std::size_t count = size();
  if (a.size() < count || b.size() < count)
    throw DomainError("fbm sample_pair output spans are too short");
  if (count == 1) {
    a[0] = b[0] = 0.0;
    return;
  }
  noise_.sample_pair(normals, ws, a.subspan(1, count - 1), b.subspan(1, count - 1));
  integrate(a.first(count));
  integrate(b.first(count));
}

SamplePath FbmSampler::sample(Seed seed) const {
  if (k_lo_ != 0) throw DomainError("sample() needs a lattice starting at 0");
  SamplePath path;
  path.grid = Grid(step_ * static_cast<double>(k_hi_), static_cast<std::size_t>(k_hi_));
  path.hurst = hurst_;
  path.values.resize(size());
  std::vector<double> other(size());
  NormalStream normals(seed);
  auto ws = make_workspace();
  sample_pair(normals, ws, path.values, other);
  return path;
}

SamplePath sample_fbm(double hurst, const Grid& grid, Seed seed) {
  return FbmSampler(hurst, grid).sample(seed);
}

void apply_drift(SamplePath& path, double drift) {
  const double dt = path.grid.step();
  for (std::size_t i = 0; i < path.values.size(); ++i)
    path.values[i] -= drift * static_cast<double>(i) * dt;
}

SamplePath sample_drifted_input(const ModelParams& params, const Grid& grid, Seed seed) {
  params.validate();
  SamplePath path = sample_fbm(params.hurst, grid, seed);
  apply_drift(path, params.drift);
  return path;
}

} // namespace refbm
