#pragma once

#include <optional>
#include <vector>

#include "mdobf/human_channel.hpp"
#include "mdobf/receiver.hpp"
#include "mdobf/scenario.hpp"
#include "mdobf/spectral.hpp"

namespace mdobf {

struct PipelineOptions {
  bool method1 = true;  // reference-stripped view of the raw signal
  bool method2 = true;  // CSI power view
  bool link = true;     // intended-receiver BER / EVM
  bool keep_rx = false; // retain the whole received signal (large)
  std::vector<int> method2_selection;  // empty: every used subcarrier
};

struct LinkResult {
  std::size_t n_bits = 0;
  std::size_t bit_errors = 0;
  std::size_t n_frames = 0;
  double ber = 0.0;
  double evm = 0.0;  // after zero-forcing and pilot phase correction
};

struct SimulationResult {
  DerivedParams derived;
  ChannelRealization channel;
  std::vector<cplx> method1_series;  // rx * conj(clean tx), block averaged
  double method1_rate_hz = 0.0;
  double method1_t0 = 0.0;
  CfrSeries cfr;
  std::optional<Spectrogram> method1;
  std::optional<Spectrogram> method2;
  std::optional<LinkResult> link;
  BasebandSignal rx;  // empty unless keep_rx
};

// The sensing stream is a continuous run of known symbols, processed in
// chunks of whole symbols about one method-1 block long (sample_rate /
// method1_rate samples). Each chunk is spoofed, modulated, smeared,
// propagated and given noise on its own. Noise is drawn per symbol from the
// kNoise substream indexed by the symbol number, so results do not depend on
// the thread count.
SimulationResult simulate(const ScenarioConfig& cfg, const PipelineOptions& opt = {});

// Payload frames (preamble plus cfg.link.frame_data_symbols data symbols)
// carrying cfg.link.n_bits bits from the kBits substream, sent back to back
// from t = 0 through the obfuscator and `chan`. The receiver averages the
// preamble estimates, equalizes, corrects the common pilot phase and demaps.
LinkResult simulate_link(const ScenarioConfig& cfg, const ChannelRealization& chan);

}  // namespace mdobf
