#include "mdobf/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace mdobf {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

}  // namespace

struct Dft::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

Dft::Dft(std::size_t n) : n_(n), plans_(std::make_unique<Plans>()) {
  if (n == 0) throw DimensionError("Dft: size must be positive");
  std::vector<cplx> a(n), b(n);
  std::lock_guard lock(planner_mutex());
  const int size = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  plans_->fwd = fftw_plan_dft_1d(size, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  plans_->inv = fftw_plan_dft_1d(size, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
}

Dft::~Dft() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->inv) fftw_destroy_plan(plans_->inv);
}

Dft::Dft(Dft&&) noexcept = default;
Dft& Dft::operator=(Dft&&) noexcept = default;

void Dft::forward(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw DimensionError("Dft::forward: size mismatch");
  fftw_execute_dft(plans_->fwd, as_fftw(in.data()), as_fftw(out.data()));
}

void Dft::inverse(std::span<const cplx> in, std::span<cplx> out) const {
  if (in.size() != n_ || out.size() != n_) throw DimensionError("Dft::inverse: size mismatch");
  fftw_execute_dft(plans_->inv, as_fftw(in.data()), as_fftw(out.data()));
}

void Dft::forward_unitary(std::span<const cplx> in, std::span<cplx> out) const {
  forward(in, out);
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (auto& v : out) v *= s;
}

void Dft::inverse_unitary(std::span<const cplx> in, std::span<cplx> out) const {
  inverse(in, out);
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (auto& v : out) v *= s;
}

const Dft& dft_of_size(std::size_t n) {
  static std::mutex m;
  static std::map<std::size_t, std::unique_ptr<Dft>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Dft>(n);
  return *slot;
}

}  // namespace mdobf
