#include "spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace lmcf::detail {
namespace {

using cplx = std::complex<double>;

// fftw planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

/// Forward/backward plans with buffers they own. Executing on the owned buffers
/// keeps alignment fixed, so the chosen codelets (and the bits) never change.
struct PlanPair {
  std::size_t count = 0;
  fftw_complex* fwd_in = nullptr;
  fftw_complex* fwd_out = nullptr;
  fftw_complex* bwd_in = nullptr;
  fftw_complex* bwd_out = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit PlanPair(const std::vector<int>& sizes) {
    count = 1;
    for (int s : sizes) count *= static_cast<std::size_t>(s);
    std::lock_guard lock(planner_mutex());
    fwd_in = fftw_alloc_complex(count);
    fwd_out = fftw_alloc_complex(count);
    bwd_in = fftw_alloc_complex(count);
    bwd_out = fftw_alloc_complex(count);
    const int rank = static_cast<int>(sizes.size());
    forward = fftw_plan_dft(rank, sizes.data(), fwd_in, fwd_out, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft(rank, sizes.data(), bwd_in, bwd_out, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~PlanPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
    fftw_free(fwd_in);
    fftw_free(fwd_out);
    fftw_free(bwd_in);
    fftw_free(bwd_out);
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
};

PlanPair& plans_for(const std::vector<int>& sizes) {
  thread_local std::map<std::vector<int>, std::unique_ptr<PlanPair>> cache;
  auto& slot = cache[sizes];
  if (!slot) slot = std::make_unique<PlanPair>(sizes);
  return *slot;
}

}  // namespace

struct SpectralDifferentiator::Impl {
  GridSpec spec;
  PlanPair* plans;
  std::vector<cplx> spectrum;
  // Angular wavenumber of each Fourier index, per axis.
  std::array<std::vector<double>, kMaxDim> omega;
};

SpectralDifferentiator::SpectralDifferentiator(const GridSpec& spec,
                                               std::span<const double> values)
    : impl_(new Impl{spec, &plans_for(spec.sizes()), {}, {}}) {
  auto& p = *impl_->plans;
  for (std::size_t i = 0; i < p.count; ++i) {
    p.fwd_in[i][0] = values[i];
    p.fwd_in[i][1] = 0.0;
  }
  fftw_execute(p.forward);
  impl_->spectrum.resize(p.count);
  for (std::size_t i = 0; i < p.count; ++i) {
    impl_->spectrum[i] = cplx(p.fwd_out[i][0], p.fwd_out[i][1]);
  }
  for (int a = 0; a < spec.dim(); ++a) {
    const int n = spec.size(a);
    auto& w = impl_->omega[a];
    w.resize(n);
    for (int j = 0; j < n; ++j) {
      const int k = j < n / 2 ? j : j - n;
      w[j] = 2.0 * std::numbers::pi * k / spec.period(a);
    }
  }
}

SpectralDifferentiator::~SpectralDifferentiator() { delete impl_; }

std::vector<double> SpectralDifferentiator::partial(const std::array<int, kMaxDim>& orders) const {
  const GridSpec& spec = impl_->spec;
  const int dim = spec.dim();
  auto& p = *impl_->plans;

  // Per-axis multiplier tables (i*omega)^m, Nyquist zeroed for odd m.
  std::array<std::vector<cplx>, kMaxDim> mult;
  for (int a = 0; a < dim; ++a) {
    const int n = spec.size(a);
    mult[a].resize(n);
    for (int j = 0; j < n; ++j) {
      const double w = impl_->omega[a][j];
      cplx m(1.0, 0.0);
      for (int k = 0; k < orders[a]; ++k) m *= cplx(0.0, w);
      if (orders[a] % 2 == 1 && j == n / 2) m = 0.0;
      mult[a][j] = m;
    }
  }

  for (std::size_t i = 0; i < p.count; ++i) {
    std::size_t rest = i;
    cplx m(1.0, 0.0);
    for (int a = 0; a < dim; ++a) {
      const std::size_t j = rest / spec.stride(a);
      rest %= spec.stride(a);
      if (orders[a] != 0) m *= mult[a][j];
    }
    const cplx v = impl_->spectrum[i] * m;
    p.bwd_in[i][0] = v.real();
    p.bwd_in[i][1] = v.imag();
  }
  fftw_execute(p.backward);

  std::vector<double> out(p.count);
  const double scale = 1.0 / static_cast<double>(p.count);
  for (std::size_t i = 0; i < p.count; ++i) out[i] = p.bwd_out[i][0] * scale;
  return out;
}

std::vector<double> SpectralDifferentiator::prolongate(const GridSpec& fine) const {
  const GridSpec& spec = impl_->spec;
  const int dim = spec.dim();
  auto& p = plans_for(fine.sizes());
  for (std::size_t i = 0; i < p.count; ++i) p.bwd_in[i][0] = p.bwd_in[i][1] = 0.0;

  struct Target {
    std::size_t index;
    double weight;
  };
  std::array<std::vector<std::vector<Target>>, kMaxDim> targets;
  for (int a = 0; a < dim; ++a) {
    const int n = spec.size(a), m = fine.size(a);
    targets[a].resize(n);
    for (int j = 0; j < n; ++j) {
      const int k = j < n / 2 ? j : j - n;
      if (j == n / 2 && m > n) {
        targets[a][j] = {{static_cast<std::size_t>(m - n / 2) * fine.stride(a), 0.5},
                         {static_cast<std::size_t>(n / 2) * fine.stride(a), 0.5}};
      } else {
        targets[a][j] = {{static_cast<std::size_t>(k >= 0 ? k : m + k) * fine.stride(a), 1.0}};
      }
    }
  }

  const double scale = 1.0 / static_cast<double>(impl_->spectrum.size());
  for (std::size_t i = 0; i < impl_->spectrum.size(); ++i) {
    std::size_t rest = i;
    std::vector<Target> acc = {{0, scale}};
    for (int a = 0; a < dim; ++a) {
      const std::size_t j = rest / spec.stride(a);
      rest %= spec.stride(a);
      std::vector<Target> next;
      for (const auto& t : acc)
        for (const auto& u : targets[a][j]) next.push_back({t.index + u.index, t.weight * u.weight});
      acc = std::move(next);
    }
    for (const auto& t : acc) {
      p.bwd_in[t.index][0] += t.weight * impl_->spectrum[i].real();
      p.bwd_in[t.index][1] += t.weight * impl_->spectrum[i].imag();
    }
  }
  fftw_execute(p.backward);
  std::vector<double> out(p.count);
  for (std::size_t i = 0; i < p.count; ++i) out[i] = p.bwd_out[i][0];
  return out;
}

}  // namespace lmcf::detail
