#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "mdobf/types.hpp"

namespace mdobf {

// Fixed-size complex DFT backed by FFTW. Plans are created once (planner
// access is serialized) and executed through the new-array interface, so one
// Dft may be shared by many threads as long as each passes its own buffers.
class Dft {
 public:
  explicit Dft(std::size_t n);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;
  Dft(Dft&&) noexcept;
  Dft& operator=(Dft&&) noexcept;

  std::size_t size() const { return n_; }

  // Unscaled transforms: forward uses e^{-j2pi kn/N}, inverse e^{+j2pi kn/N}.
  void forward(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse(std::span<const cplx> in, std::span<cplx> out) const;

  // Unitary (1/sqrt(N)) variants used by the OFDM modem.
  void forward_unitary(std::span<const cplx> in, std::span<cplx> out) const;
  void inverse_unitary(std::span<const cplx> in, std::span<cplx> out) const;

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

// Shared plan cache keyed by size; the returned reference lives for the
// whole program.
const Dft& dft_of_size(std::size_t n);

}  // namespace mdobf
