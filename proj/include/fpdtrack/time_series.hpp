#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fpdtrack {

/// Uniformly sampled real signal. Sample k sits at time t0 + k / f_s.
struct TimeSeries {
  std::vector<double> samples;
  double f_s = 0.0;  // sampling rate, Hz
  double t0 = 0.0;   // start time, s

  std::size_t size() const { return samples.size(); }
  double time_at(std::size_t k) const { return t0 + static_cast<double>(k) / f_s; }
  double duration() const { return static_cast<double>(samples.size()) / f_s; }

  void validate() const {
    if (f_s <= 0.0) throw std::invalid_argument("TimeSeries: f_s must be positive");
    if (samples.empty()) throw std::invalid_argument("TimeSeries: needs at least one sample");
  }
};

/// Per-sample instantaneous frequency, aligned with an associated TimeSeries.
struct FrequencyTrack {
  std::vector<double> freqs;  // Hz, one per sample
  double f_s = 0.0;

  std::size_t size() const { return freqs.size(); }
};

}  // namespace fpdtrack
