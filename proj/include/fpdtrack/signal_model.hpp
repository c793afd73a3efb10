#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "fpdtrack/random.hpp"
#include "fpdtrack/time_series.hpp"

namespace fpdtrack::signal {

/// Parameters of the phenomenological free-precession-decay model:
/// exponentially decaying sinusoid with a random-walk carrier frequency
/// and additive white Gaussian noise.
struct SimParams {
  double a0 = 1.0;         // initial amplitude, signal units
  double t2star = 100.0;   // decay time constant, s
  double f_c = 84.6;       // constant carrier frequency, Hz
  double d = 0.0;          // frequency diffusion constant, Hz^2/s
  double sigma_eta = 0.0;  // noise std, signal units
  double phi0 = 0.0;       // initial phase, rad
  double f_s = 1000.0;     // sampling rate, Hz
  double duration = 10.0;  // record length, s
  std::uint64_t seed = 0;

  void validate() const {
    if (a0 < 0.0) throw std::invalid_argument("SimParams: a0 must be >= 0");
    if (t2star <= 0.0) throw std::invalid_argument("SimParams: t2star must be > 0");
    if (d < 0.0) throw std::invalid_argument("SimParams: d must be >= 0");
    if (sigma_eta < 0.0) throw std::invalid_argument("SimParams: sigma_eta must be >= 0");
    if (f_s <= 0.0) throw std::invalid_argument("SimParams: f_s must be > 0");
    if (f_s <= 2.0 * f_c)
      throw std::invalid_argument("SimParams: f_s must exceed 2*f_c (Nyquist)");
    if (duration * f_s < 1.0) throw std::invalid_argument("SimParams: empty record");
  }
};

/// Random-walk instantaneous frequency: freqs[0] = f_c and each later
/// sample adds an increment ~ N(0, 2*d/f_s), so the walk has diffusion
/// constant d = var * f_s / 2. Deterministic for a given seed.
inline FrequencyTrack gen_random_walk_frequency(double f_c, double d, double f_s,
                                                std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_random_walk_frequency: n must be >= 1");
  if (f_s <= 0.0) throw std::invalid_argument("gen_random_walk_frequency: f_s must be > 0");
  if (d < 0.0) throw std::invalid_argument("gen_random_walk_frequency: d must be >= 0");

  GaussianRng rng(seed);
  const double sigma_df = std::sqrt(2.0 * d / f_s);
  FrequencyTrack track;
  track.f_s = f_s;
  track.freqs.resize(n);
  double f = f_c;
  track.freqs[0] = f;
  for (std::size_t k = 1; k < n; ++k) {
    f += sigma_df * rng.gauss();
    track.freqs[k] = f;
  }
  return track;
}

/// Simulated FPD record y(t_k) = a0 exp(-t_k/t2star) sin(2 pi f(t_k) t_k + phi0) + eta_k
/// together with the ground-truth frequency track. The frequency multiplies
/// absolute time (no phase integral). Noise draws come from a sub-stream
/// derived from the same seed, so the truth track alone can be regenerated
/// with gen_random_walk_frequency(seed).
inline std::pair<TimeSeries, FrequencyTrack> simulate_fpd(const SimParams& p) {
  p.validate();
  const auto n = static_cast<std::size_t>(std::llround(p.duration * p.f_s));
  FrequencyTrack track = gen_random_walk_frequency(p.f_c, p.d, p.f_s, n, p.seed);

  GaussianRng noise(mix_seed(p.seed ^ 0x6e6f697365ULL));
  TimeSeries ts;
  ts.f_s = p.f_s;
  ts.t0 = 0.0;
  ts.samples.resize(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / p.f_s;
    const double env = p.a0 * std::exp(-t / p.t2star);
    const double eta = p.sigma_eta * noise.gauss();
    ts.samples[k] = env * std::sin(two_pi * track.freqs[k] * t + p.phi0) + eta;
  }
  return {std::move(ts), std::move(track)};
}

/// Initial signal-to-noise ratio a0^2 / (2 sigma_eta^2).
inline double snr0(double a0, double sigma_eta) {
  if (sigma_eta <= 0.0)
    throw std::invalid_argument("snr0: sigma_eta must be > 0");
  return a0 * a0 / (2.0 * sigma_eta * sigma_eta);
}

}  // namespace fpdtrack::signal
