#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fpdtrack/detail/dft.hpp"
#include "fpdtrack/state.hpp"
#include "fpdtrack/time_series.hpp"

namespace fpdtrack::spectral {

/// Partition of a record into equal non-overlapping blocks; trailing
/// samples that do not fill a block are dropped.
struct BlockSpec {
  std::size_t n_bl = 0;       // samples per block
  std::size_t n_blocks = 0;   // complete blocks
  std::size_t remainder_dropped = 0;
  double f_s = 0.0;

  double t_bl() const { return static_cast<double>(n_bl) / f_s; }
  double dt() const { return 1.0 / f_s; }
};

/// DFT bins used as the measurement vector: 2*l_half + 1 bins centered
/// on m_center. f0 = m_center / t_bl fits an integer number of periods
/// into a block.
struct SpectralWindow {
  std::size_t m_center = 0;
  std::size_t l_half = 1;
  double f0 = 0.0;
};

/// Normalized DFT coefficients of one block at the window bins.
struct BlockMeasurement {
  std::vector<std::complex<double>> coeffs;  // length 2*l_half + 1
  std::size_t block_index = 0;
};

inline BlockSpec segment(const TimeSeries& ts, double t_bl) {
  ts.validate();
  const auto n_bl = static_cast<std::size_t>(std::llround(t_bl * ts.f_s));
  if (n_bl < 2) throw std::invalid_argument("segment: block must hold at least 2 samples");
  if (n_bl > ts.size())
    throw std::invalid_argument("segment: block longer than the time series");
  BlockSpec spec;
  spec.n_bl = n_bl;
  spec.n_blocks = ts.size() / n_bl;
  spec.remainder_dropped = ts.size() - spec.n_blocks * n_bl;
  spec.f_s = ts.f_s;
  return spec;
}

inline void validate_window(const SpectralWindow& win, const BlockSpec& spec) {
  if (win.m_center < win.l_half + 1)
    throw std::invalid_argument("SpectralWindow: m_center - l_half must be >= 1");
  if (win.m_center + win.l_half > spec.n_bl - 1)
    throw std::invalid_argument("SpectralWindow: m_center + l_half must be <= n_bl - 1");
}

/// Picks the center bin M as the max-magnitude DFT bin of the first block
/// within [search_lo, search_hi]. The bin grid is the exact n_bl-point DFT
/// grid, so f0 * t_bl is an integer by construction.
inline SpectralWindow select_center_bin(const TimeSeries& ts, double t_bl,
                                        double search_lo, double search_hi,
                                        std::size_t l_half = 1) {
  const BlockSpec spec = segment(ts, t_bl);
  const double tb = spec.t_bl();
  if (!(search_lo < search_hi) || search_lo <= 0.0 || search_hi >= ts.f_s / 2.0)
    throw std::invalid_argument("select_center_bin: range must lie inside (0, f_s/2)");

  auto m_lo = static_cast<std::size_t>(std::ceil(search_lo * tb));
  auto m_hi = static_cast<std::size_t>(std::floor(search_hi * tb));
  if (m_lo < l_half + 1) m_lo = l_half + 1;
  if (m_hi > spec.n_bl - 1 - l_half) m_hi = spec.n_bl - 1 - l_half;
  if (m_lo > m_hi)
    throw std::invalid_argument("select_center_bin: no admissible bin in search range");

  const std::span<const double> block(ts.samples.data(), spec.n_bl);
  std::size_t best = m_lo;
  double best_mag = -1.0;
  for (std::size_t m = m_lo; m <= m_hi; ++m) {
    const double mag = std::norm(detail::goertzel_bin(block, m, spec.n_bl));
    if (mag > best_mag) {
      best_mag = mag;
      best = m;
    }
  }
  SpectralWindow win;
  win.m_center = best;
  win.l_half = l_half;
  win.f0 = static_cast<double>(best) / tb;
  validate_window(win, spec);
  return win;
}

/// One normalized DFT coefficient (2/n_bl scale) of a block at bin m.
inline std::complex<double> normalized_bin(std::span<const double> block, std::size_t m,
                                           std::size_t n_bl) {
  return detail::goertzel_bin(block, m, n_bl) * (2.0 / static_cast<double>(n_bl));
}

/// Windowed DFT of block k, scaled by 2/n_bl so that white sample noise of
/// variance s^2 turns into coefficient noise of variance 2 s^2 / n_bl per
/// real component. Block-local time origin: t_n = n / f_s from block start.
inline BlockMeasurement block_dft(const TimeSeries& ts, const BlockSpec& spec,
                                  const SpectralWindow& win, std::size_t k) {
  if (k >= spec.n_blocks)
    throw std::invalid_argument("block_dft: block index " + std::to_string(k) +
                                " out of range");
  validate_window(win, spec);
  const double* z = ts.samples.data() + k * spec.n_bl;
  const std::size_t n = spec.n_bl;
  const double two_pi_over_n = 2.0 * std::numbers::pi / static_cast<double>(n);

  BlockMeasurement meas;
  meas.block_index = k;
  meas.coeffs.resize(2 * win.l_half + 1);
  for (std::size_t j = 0; j < meas.coeffs.size(); ++j) {
    const std::size_t m = win.m_center - win.l_half + j;
    // Kahan-compensated sums; the angle is reduced exactly via m*n mod n_bl.
    double re = 0.0, re_c = 0.0, im = 0.0, im_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ang = -two_pi_over_n * static_cast<double>((m * i) % n);
      const double tr = z[i] * std::cos(ang);
      const double ti = z[i] * std::sin(ang);
      double y = tr - re_c;
      double s = re + y;
      re_c = (s - re) - y;
      re = s;
      y = ti - im_c;
      s = im + y;
      im_c = (s - im) - y;
      im = s;
    }
    meas.coeffs[j] = std::complex<double>(re, im) * (2.0 / static_cast<double>(n));
  }
  return meas;
}

namespace detail_geom {

inline constexpr double kSingularEps = 1e-8;  // threshold on |1 - e^{i theta}|

/// 1 - e^{i phi} evaluated as -2i sin(phi/2) e^{i phi/2}; keeps full
/// relative accuracy for small phi where the direct form cancels.
inline std::complex<double> one_minus_cis(double phi) {
  const double h = 0.5 * phi;
  const double s = std::sin(h);
  return std::complex<double>(2.0 * s * s, -2.0 * s * std::cos(h));
}

inline std::complex<double> cis(double phi) {
  return {std::cos(phi), std::sin(phi)};
}

/// S = sum_{n=0}^{N-1} w^n and T = sum_{n=0}^{N-1} n w^n for w = e^{i step}.
/// total is the exactly reduced phase of w^N (integer multiples of 2 pi
/// removed analytically). Near w = 1 the closed forms are replaced by the
/// explicit sums, which keeps S and T continuous across the singularity.
struct GeomSums {
  std::complex<double> s;
  std::complex<double> t;
};

inline GeomSums geom_sums(double step, double total, std::size_t n, bool want_t) {
  const std::complex<double> den = one_minus_cis(step);
  GeomSums out;
  if (std::abs(den) < kSingularEps) {
    std::complex<double> s(0.0, 0.0), t(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::complex<double> w = cis(step * static_cast<double>(i));
      s += w;
      if (want_t) t += static_cast<double>(i) * w;
    }
    out.s = s;
    out.t = t;
    return out;
  }
  const std::complex<double> num = one_minus_cis(total);
  out.s = num / den;
  if (want_t) {
    const std::complex<double> w = cis(step);
    const std::complex<double> wn = cis(total);
    out.t = (-static_cast<double>(n) * wn * den + w * num) / (den * den);
  }
  return out;
}

}  // namespace detail_geom

/// Analytic model of the windowed, normalized block DFT of
/// z(t_n) = a cos(2 pi (f0 + df) t_n + phi): for each bin m,
///
///   h_m = (a / n_bl) * ( e^{i phi} S1 + e^{-i phi} S2 ),
///
/// with S1, S2 the geometric sums of the positive- and negative-frequency
/// exponentials. The removable singularity of S1 at df -> (m - M)/t_bl
/// (and of S2 near f0 + f_m -> f_s) is handled by direct summation.
inline std::vector<std::complex<double>> h_measure(const State5& x,
                                                   const SpectralWindow& win,
                                                   const BlockSpec& spec) {
  if (!x.allFinite()) throw std::invalid_argument("h_measure: non-finite state");
  const double two_pi = 2.0 * std::numbers::pi;
  const auto n = static_cast<double>(spec.n_bl);
  const double df = x[st::df];
  const double total = two_pi * df * spec.t_bl();  // reduced phase of w^N
  const std::complex<double> eip = detail_geom::cis(x[st::phi]);
  const double scale = x[st::a] / n;

  std::vector<std::complex<double>> h(2 * win.l_half + 1);
  for (std::size_t j = 0; j < h.size(); ++j) {
    const auto m = static_cast<double>(win.m_center - win.l_half + j);
    const auto mc = static_cast<double>(win.m_center);
    const double step1 = two_pi * ((mc - m) / n + df * spec.dt());
    const double step2 = two_pi * ((mc + m) / n + df * spec.dt());
    const auto g1 = detail_geom::geom_sums(step1, total, spec.n_bl, false);
    const auto g2 = detail_geom::geom_sums(step2, total, spec.n_bl, false);
    h[j] = scale * (eip * g1.s + std::conj(eip * g2.s));
  }
  return h;
}

/// Jacobian of the stacked real measurement [Re h; Im h] with respect to
/// (a, da, phi, df, ddf). The da and ddf columns are exactly zero.
inline Eigen::MatrixXd h_jacobian(const State5& x, const SpectralWindow& win,
                                  const BlockSpec& spec) {
  if (!x.allFinite()) throw std::invalid_argument("h_jacobian: non-finite state");
  const double two_pi = 2.0 * std::numbers::pi;
  const auto n = static_cast<double>(spec.n_bl);
  const double df = x[st::df];
  const double total = two_pi * df * spec.t_bl();
  const std::complex<double> eip = detail_geom::cis(x[st::phi]);
  const double a = x[st::a];

  const std::size_t nb = 2 * win.l_half + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * nb, 5);
  for (std::size_t j = 0; j < nb; ++j) {
    const auto m = static_cast<double>(win.m_center - win.l_half + j);
    const auto mc = static_cast<double>(win.m_center);
    const double step1 = two_pi * ((mc - m) / n + df * spec.dt());
    const double step2 = two_pi * ((mc + m) / n + df * spec.dt());
    const auto g1 = detail_geom::geom_sums(step1, total, spec.n_bl, true);
    const auto g2 = detail_geom::geom_sums(step2, total, spec.n_bl, true);
    const std::complex<double> pos = eip * g1.s;          // e^{i phi} S1
    const std::complex<double> neg = std::conj(eip * g2.s);

    const std::complex<double> dh_da = (pos + neg) / n;
    const std::complex<double> dh_dphi =
        a / n * (std::complex<double>(0, 1) * pos - std::complex<double>(0, 1) * neg);
    const std::complex<double> dh_ddf =
        a / n * two_pi * spec.dt() *
        (std::complex<double>(0, 1) * eip * g1.t -
         std::complex<double>(0, 1) * std::conj(eip * g2.t));

    jac(j, st::a) = dh_da.real();
    jac(j + nb, st::a) = dh_da.imag();
    jac(j, st::phi) = dh_dphi.real();
    jac(j + nb, st::phi) = dh_dphi.imag();
    jac(j, st::df) = dh_ddf.real();
    jac(j + nb, st::df) = dh_ddf.imag();
  }
  return jac;
}

/// Measurement model plugged into the Kalman machinery: stacks the complex
/// coefficients as [Re; Im].
struct SpectralModel {
  SpectralWindow win;
  BlockSpec spec;

  int dim() const { return 2 * (2 * static_cast<int>(win.l_half) + 1); }

  static Eigen::VectorXd stack(std::span<const std::complex<double>> coeffs) {
    Eigen::VectorXd y(2 * coeffs.size());
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      y[static_cast<Eigen::Index>(j)] = coeffs[j].real();
      y[static_cast<Eigen::Index>(j + coeffs.size())] = coeffs[j].imag();
    }
    return y;
  }

  Eigen::VectorXd value(const State5& x) const { return stack(h_measure(x, win, spec)); }
  Eigen::MatrixXd jacobian(const State5& x) const { return h_jacobian(x, win, spec); }
};

}  // namespace fpdtrack::spectral
