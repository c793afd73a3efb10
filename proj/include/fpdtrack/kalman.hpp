#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fpdtrack/common.hpp"
#include "fpdtrack/spectral.hpp"
#include "fpdtrack/state.hpp"
#include "fpdtrack/time_series.hpp"

namespace fpdtrack::kalman {

template <int N>
struct Gaussian {
  Eigen::Matrix<double, N, 1> mean = Eigen::Matrix<double, N, 1>::Zero();
  Eigen::Matrix<double, N, N> cov = Eigen::Matrix<double, N, N>::Zero();
};

template <int N>
Gaussian<N> predict_linear(const Gaussian<N>& g, const Eigen::Matrix<double, N, N>& f,
                           const Eigen::Matrix<double, N, N>& q) {
  Gaussian<N> out;
  out.mean = f * g.mean;
  out.cov = f * g.cov * f.transpose() + q;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

template <int N>
struct Updated {
  Gaussian<N> post;
  double loglik = 0.0;
};

/// EKF measurement update with isotropic noise R = r I, Joseph-form
/// covariance, and the Gaussian innovation log-likelihood increment.
/// Model must provide dim(), value(x) and jacobian(x).
template <int N, class Model>
Updated<N> ekf_update(const Gaussian<N>& pred, const Eigen::VectorXd& y,
                      const Model& model, double r, std::size_t block_index = 0) {
  if (r <= 0.0) throw std::invalid_argument("ekf_update: r must be > 0");
  const Eigen::VectorXd h = model.value(pred.mean);
  const Eigen::MatrixXd jac = model.jacobian(pred.mean);
  const auto d = static_cast<Eigen::Index>(model.dim());

  const Eigen::VectorXd nu = y - h;
  Eigen::MatrixXd s = jac * pred.cov * jac.transpose();
  s.diagonal().array() += r;
  s = 0.5 * (s + s.transpose()).eval();

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
    throw NumericalError("ekf_update: innovation covariance not positive definite at block " +
                         std::to_string(block_index));

  // K = P H^T S^{-1}; S is symmetric so K^T = S^{-1} H P.
  const Eigen::MatrixXd k_gain = ldlt.solve(jac * pred.cov).transpose();

  Updated<N> out;
  out.post.mean = pred.mean + k_gain * nu;
  const Eigen::Matrix<double, N, N> a =
      Eigen::Matrix<double, N, N>::Identity() - k_gain * jac;
  out.post.cov = a * pred.cov * a.transpose() + r * k_gain * k_gain.transpose();
  out.post.cov = 0.5 * (out.post.cov + out.post.cov.transpose()).eval();

  const double maha = nu.dot(ldlt.solve(nu));
  const double logdet = ldlt.vectorD().array().log().sum();
  out.loglik = -0.5 * (maha + logdet +
                       static_cast<double>(d) * std::log(2.0 * std::numbers::pi));
  return out;
}

template <int N>
struct Smoothed {
  std::vector<Gaussian<N>> states;
  /// lag_one[k] = Cov(x_k, x_{k-1} | all data) for k >= 1; lag_one[0] is zero.
  std::vector<Eigen::Matrix<double, N, N>> lag_one;
};

/// Rauch-Tung-Striebel backward pass. predicted[k] is the one-step-ahead
/// prior that produced filtered[k]; the last block is its own smooth.
template <int N>
Smoothed<N> rts_smooth(const std::vector<Gaussian<N>>& filtered,
                       const std::vector<Gaussian<N>>& predicted,
                       const Eigen::Matrix<double, N, N>& f) {
  if (filtered.empty() || filtered.size() != predicted.size())
    throw std::invalid_argument("rts_smooth: sequences empty or misaligned");
  const std::size_t n = filtered.size();
  Smoothed<N> out;
  out.states.resize(n);
  out.lag_one.assign(n, Eigen::Matrix<double, N, N>::Zero());
  out.states[n - 1] = filtered[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) {
    Eigen::LDLT<Eigen::Matrix<double, N, N>> ldlt(predicted[k + 1].cov);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any())
      throw NumericalError("rts_smooth: predicted covariance not invertible at block " +
                           std::to_string(k + 1));
    // G = P_filt F^T P_pred^{-1}
    const Eigen::Matrix<double, N, N> gain =
        ldlt.solve(f * filtered[k].cov).transpose();
    out.states[k].mean = filtered[k].mean +
                         gain * (out.states[k + 1].mean - predicted[k + 1].mean);
    Eigen::Matrix<double, N, N> cov =
        filtered[k].cov +
        gain * (out.states[k + 1].cov - predicted[k + 1].cov) * gain.transpose();
    out.states[k].cov = 0.5 * (cov + cov.transpose());
    out.lag_one[k + 1] = out.states[k + 1].cov * gain.transpose();
  }
  return out;
}

/// Static parameters of the block state-space model. q_da and q_ddf are the
/// only nonzero process variances; r is the per-real-component measurement
/// noise variance in normalized DFT units. p0_diag all zero selects the
/// default weakly informative prior derived from a0 and t_bl.
struct HyperParams {
  double q_da = 0.0;
  double q_ddf = 0.0;
  double r = 1e-4;
  double df0 = 0.0;
  double a0 = 1.0;
  Eigen::Matrix<double, 5, 1> p0_diag = Eigen::Matrix<double, 5, 1>::Zero();

  void validate() const {
    if (q_da < 0.0 || q_ddf < 0.0) throw std::invalid_argument("HyperParams: q must be >= 0");
    if (r <= 0.0) throw std::invalid_argument("HyperParams: r must be > 0");
  }
};

inline Mat5 transition_matrix(double t_bl) {
  Mat5 f = Mat5::Identity();
  f(st::a, st::da) = 1.0;
  f(st::phi, st::df) = 2.0 * std::numbers::pi * t_bl;
  f(st::df, st::ddf) = 1.0;
  return f;
}

inline Mat5 process_noise(const HyperParams& hp) {
  Mat5 q = Mat5::Zero();
  q(st::da, st::da) = hp.q_da;
  q(st::ddf, st::ddf) = hp.q_ddf;
  return q;
}

inline Eigen::Matrix<double, 5, 1> default_p0_diag(double a0, double t_bl) {
  Eigen::Matrix<double, 5, 1> p0;
  p0[st::a] = a0 * a0;
  p0[st::da] = 0.01 * a0 * a0;
  p0[st::phi] = std::numbers::pi * std::numbers::pi;
  p0[st::df] = 4.0 / (t_bl * t_bl);
  p0[st::ddf] = 0.01 / (t_bl * t_bl);
  return p0;
}

inline std::pair<State5, Mat5> predict(const State5& x, const Mat5& p,
                                       const HyperParams& hp, double t_bl) {
  Gaussian<5> g{x, p};
  const Gaussian<5> out = predict_linear<5>(g, transition_matrix(t_bl), process_noise(hp));
  return {out.mean, out.cov};
}

struct UpdateOut {
  State5 x;
  Mat5 p;
  double loglik = 0.0;
};

inline UpdateOut update(const State5& x_pred, const Mat5& p_pred,
                        const spectral::BlockMeasurement& y, const HyperParams& hp,
                        const spectral::SpectralWindow& win,
                        const spectral::BlockSpec& spec) {
  const spectral::SpectralModel model{win, spec};
  const auto res = ekf_update<5>(Gaussian<5>{x_pred, p_pred},
                                 spectral::SpectralModel::stack(y.coeffs), model, hp.r,
                                 y.block_index);
  return {res.post.mean, res.post.cov, res.loglik};
}

/// Smoothed per-block trajectory with everything the EM pass and the
/// writers need: filtered and smoothed moments, lag-one cross-covariances
/// and the innovation log-likelihood.
struct TrackResult {
  spectral::BlockSpec spec;
  spectral::SpectralWindow win;
  double t0 = 0.0;
  std::vector<State5> smoothed;
  std::vector<Mat5> smoothed_cov;
  std::vector<Mat5> lag_one;
  std::vector<State5> filtered;
  std::vector<Mat5> filtered_cov;
  std::vector<double> loglik_steps;
  double loglik = 0.0;

  std::size_t n_blocks() const { return smoothed.size(); }
  double f0() const { return win.f0; }
  double t_bl() const { return spec.t_bl(); }
  double t_center(std::size_t k) const {
    return t0 + (static_cast<double>(k) + 0.5) * spec.t_bl();
  }
  double frequency(std::size_t k) const { return win.f0 + smoothed[k][st::df]; }
  double frequency_std(std::size_t k) const {
    return std::sqrt(std::max(0.0, smoothed_cov[k](st::df, st::df)));
  }
  double amplitude(std::size_t k) const { return smoothed[k][st::a]; }
  double amplitude_std(std::size_t k) const {
    return std::sqrt(std::max(0.0, smoothed_cov[k](st::a, st::a)));
  }
};

/// Forward EKF over precomputed block measurements followed by the RTS
/// backward pass. The initial phase is read off the first block's center
/// coefficient; the prior on block 0 is updated by its measurement before
/// any prediction happens.
template <class Model>
TrackResult run_eks_measured(const std::vector<spectral::BlockMeasurement>& meas,
                             const spectral::BlockSpec& spec,
                             const spectral::SpectralWindow& win, const HyperParams& hp,
                             const Model& model, double t0 = 0.0) {
  if (meas.empty()) throw std::invalid_argument("run_eks_measured: no measurements");
  hp.validate();

  const double t_bl = spec.t_bl();
  const Mat5 f = transition_matrix(t_bl);
  const Mat5 q = process_noise(hp);

  Gaussian<5> prior;
  prior.mean[st::a] = hp.a0;
  prior.mean[st::phi] = std::arg(meas[0].coeffs[win.l_half]);
  prior.mean[st::df] = hp.df0;
  Eigen::Matrix<double, 5, 1> p0 = hp.p0_diag;
  if ((p0.array() == 0.0).all()) p0 = default_p0_diag(hp.a0, t_bl);
  prior.cov = p0.asDiagonal();

  const std::size_t n = meas.size();
  std::vector<Gaussian<5>> predicted(n), filtered(n);
  std::vector<double> ll_steps(n);
  predicted[0] = prior;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) predicted[k] = predict_linear<5>(filtered[k - 1], f, q);
    const auto upd = ekf_update<5>(predicted[k], Model::stack(meas[k].coeffs), model,
                                   hp.r, k);
    filtered[k] = upd.post;
    ll_steps[k] = upd.loglik;
  }

  const Smoothed<5> sm = rts_smooth<5>(filtered, predicted, f);

  TrackResult track;
  track.spec = spec;
  track.win = win;
  track.t0 = t0;
  track.smoothed.reserve(n);
  track.smoothed_cov.reserve(n);
  track.filtered.reserve(n);
  track.filtered_cov.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    track.smoothed.push_back(sm.states[k].mean);
    track.smoothed_cov.push_back(sm.states[k].cov);
    track.filtered.push_back(filtered[k].mean);
    track.filtered_cov.push_back(filtered[k].cov);
  }
  track.lag_one = sm.lag_one;
  track.loglik_steps = std::move(ll_steps);
  track.loglik = 0.0;
  for (const double v : track.loglik_steps) track.loglik += v;
  return track;
}

/// Full pipeline: segment, pick the spectral window (unless one is given),
/// measure every block and run filter plus smoother.
inline TrackResult run_eks(const TimeSeries& ts, double t_bl, std::size_t l_half,
                           const HyperParams& hp, double search_lo = 0.0,
                           double search_hi = 0.0,
                           std::optional<spectral::SpectralWindow> win = {}) {
  const spectral::BlockSpec spec = spectral::segment(ts, t_bl);
  if (!win) {
    const double tb = spec.t_bl();
    double lo = search_lo > 0.0 ? search_lo : static_cast<double>(l_half + 1) / tb;
    double hi = search_hi > 0.0 ? search_hi : (ts.f_s / 2.0) * (1.0 - 1e-9);
    win = spectral::select_center_bin(ts, t_bl, lo, hi, l_half);
  }
  spectral::validate_window(*win, spec);
  std::vector<spectral::BlockMeasurement> meas;
  meas.reserve(spec.n_blocks);
  for (std::size_t k = 0; k < spec.n_blocks; ++k)
    meas.push_back(spectral::block_dft(ts, spec, *win, k));
  const spectral::SpectralModel model{*win, spec};
  return run_eks_measured(meas, spec, *win, hp, model, ts.t0);
}

}  // namespace fpdtrack::kalman
