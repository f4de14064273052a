#pragma once

#include <cstdint>

#include "polarmig/dataset.hpp"

namespace polarmig {

// Real stationary Gaussian source with correlation
// J(tau) = (4 pi / tc) cos(omega0 tau) exp(-pi tau^2 / tc^2) in each source-basis component.
struct SourceProcessSpec {
  double tc = 1e-9;
  double omega0 = 2 * kPi * 2.4e9;
  double T = 266e-9;     // half window, the window spans [0, 2T)
  double dt = 66.5e-12;  // sample interval
  double lead = 0;       // recorded time before the window
  std::uint64_t seed = 1;

  int window_samples() const { return int(std::lround(2 * T / dt)); }
  int lead_samples() const { return int(std::ceil(lead / dt - 1e-9)); }
  int total_samples() const { return lead_samples() + window_samples(); }
  double spectrum(double omega) const;     // power spectrum of J, peak near 1
  double correlation(double tau) const;    // J(tau)
  void validate() const;
};

struct TimeSignal {
  double dt = 0;
  double t0 = 0;            // time of the first sample
  Eigen::MatrixXd samples;  // channels x time
  int channels() const { return int(samples.rows()); }
  int length() const { return int(samples.cols()); }
};

// Smallest length >= n whose only prime factors are 2, 3, 5.
int fft_friendly(int n);

// Three Cartesian channels; stream picks an independent realization.
TimeSignal synth_source(const SourceProcessSpec& spec, const Basis32d& source_basis, std::uint64_t stream = 0);

// Received 3-channel fields at the listed receivers (all when empty).
std::vector<TimeSignal> simulate_received(const Scene& scene, const TimeSignal& source,
                                          const std::vector<std::size_t>& receivers = {}, double wave_speed = 3e8);

struct AutocorrelationOptions {
  int window_start = 0;  // first sample of the 2T window
  int window_length = 0;
};

// Lag-domain psi(tau_l) = (1/2T) sum_t E_par(t + tau_l) E_par(t)^T dt for lag indices >= 0.
std::vector<Eigen::Matrix2d> empirical_autocorrelation_lags(const TimeSignal& received, const AutocorrelationOptions& w,
                                                            const std::vector<int>& lags);
// Frequency-domain estimate (2 pi / 2T) E_T E_T^* on window bins [bin_lo, bin_hi],
// optionally averaged over +-smooth neighbouring bins.
std::vector<CMat2d> empirical_autocorrelation_bins(const TimeSignal& received, const AutocorrelationOptions& w,
                                                   int bin_lo, int bin_hi, int smooth = 0);

// Window bins covering [omega_lo, omega_hi].
struct BinRange {
  int lo = 0, hi = 0;
  double domega = 0;
  FrequencyBand band(double wave_speed) const;
};
BinRange snap_band(const SourceProcessSpec& spec, double omega_lo, double omega_hi);

// Lead-in long enough for every echo of the scene to arrive before the window opens.
double required_lead(const Scene& scene, const SourceProcessSpec& spec, double wave_speed);

// One stochastic acquisition turned into a coherency dataset on the snapped band.
ArrayDataSet stochastic_coherency(const Scene& scene, const SourceProcessSpec& spec, double omega_lo, double omega_hi,
                                  std::uint64_t stream = 0, int smooth = 0, double wave_speed = 3e8);

struct ErgodicityOptions {
  std::vector<double> T_ladder;   // half windows
  int realizations = 50;
  std::vector<double> lags;       // seconds
  std::size_t receiver = 0;
  double wave_speed = 3e8;
};

struct ErgodicityRow {
  double T = 0;
  double variance = 0;     // pooled over lags and entries
  double variance_se = 0;  // bootstrap standard error of the pooled variance
};

struct ErgodicityResult {
  std::vector<ErgodicityRow> rows;
  double slope = 0;  // least-squares slope of log variance against log T
  std::string csv() const;
};

ErgodicityResult ergodicity_probe(const Scene& scene, const SourceProcessSpec& base, const ErgodicityOptions& opt);

// Bootstrap standard deviation of the sample variance of x.
double bootstrap_variance_se(const std::vector<double>& x, int resamples, std::uint64_t seed);

void timeseries_write(const std::string& path, const TimeSignal& s);
TimeSignal timeseries_read(const std::string& path);

}  // namespace polarmig
