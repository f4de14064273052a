#include "polarmig/stochastic.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <json.hpp>
#include <random>
#include <sstream>

#include "polarmig/parallel.hpp"

namespace polarmig {

using nlohmann::json;
using CVec = std::vector<cd>;

double SourceProcessSpec::spectrum(double w) const {
  const double s = tc * tc / (4 * kPi);
  return std::exp(-(w - omega0) * (w - omega0) * s) + std::exp(-(w + omega0) * (w + omega0) * s);
}

double SourceProcessSpec::correlation(double tau) const {
  return 4 * kPi / tc * std::cos(omega0 * tau) * std::exp(-kPi * tau * tau / (tc * tc));
}

void SourceProcessSpec::validate() const {
  if (!(tc > 0) || !(dt > 0) || !(T > 0) || !(omega0 > 0)) throw ValidationError("source process parameters must be positive");
  if (lead < 0) throw ValidationError("source lead-in must be non-negative");
  const double nyquist = kPi / dt;
  if (!(nyquist > omega0 + 3 * kPi / tc))
    throw ValidationError("sampling interval violates Nyquist for the source band: pi/dt = " + std::to_string(nyquist) +
                          " rad/s, need above " + std::to_string(omega0 + 3 * kPi / tc));
  if (T < 10 * tc) throw ValidationError("window half-length T must be much longer than tc (at least 10 tc)");
}

int fft_friendly(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

namespace {

double signed_omega(int m, int n, double dt) {
  const int k = m <= n / 2 ? m : m - n;
  return 2 * kPi * k / (n * dt);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint32_t channel) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream), std::uint32_t(stream >> 32),
                    channel};
  return std::mt19937_64(seq);
}

}  // namespace

TimeSignal synth_source(const SourceProcessSpec& spec, const Basis32d& Us, std::uint64_t stream) {
  spec.validate();
  const int n = spec.total_samples();
  const double dw = 2 * kPi / (n * spec.dt);
  Eigen::FFT<double> fft;
  Eigen::MatrixXd comp(2, n);
  for (int c = 0; c < 2; ++c) {
    auto rng = make_rng(spec.seed, stream, std::uint32_t(c));
    std::normal_distribution<double> normal;
    CVec shaped(n);
    for (int m = 0; m < n; ++m) {
      const double a = normal(rng), b = normal(rng);
      shaped[m] = std::sqrt(spec.spectrum(signed_omega(m, n, spec.dt)) * dw) * cd(a, b) / std::sqrt(2.0);
    }
    CVec t;
    fft.fwd(t, shaped);
    // Real part of shaped circular complex noise carries the full correlation J.
    for (int i = 0; i < n; ++i) comp(c, i) = std::sqrt(2.0) * t[i].real();
  }
  TimeSignal s;
  s.dt = spec.dt;
  s.t0 = -spec.lead_samples() * spec.dt;
  s.samples = Us * comp;
  return s;
}

namespace {

// Source spectra with the e^{+i omega t} forward convention on a padded grid.
struct SourceSpectrum {
  int n = 0, m = 0;
  double dt = 0;
  std::vector<int> bins;             // positive bins carried through the transfer
  std::vector<std::array<cd, 3>> j;  // per carried bin
};

SourceSpectrum source_spectrum(const TimeSignal& src, const std::vector<int>* only_bins = nullptr) {
  SourceSpectrum s;
  s.n = src.length();
  s.m = fft_friendly(2 * s.n);
  s.dt = src.dt;
  if (only_bins)
    s.bins = *only_bins;
  else
    for (int b = 1; b <= s.m / 2; ++b) s.bins.push_back(b);
  s.j.resize(s.bins.size());
  Eigen::FFT<double> fft;
  for (int c = 0; c < 3; ++c) {
    CVec x(s.m, cd(0)), X;
    for (int i = 0; i < s.n; ++i) x[i] = src.samples(c, i);
    fft.fwd(X, x);
    for (std::size_t q = 0; q < s.bins.size(); ++q) s.j[q][c] = std::conj(X[s.bins[q]]) * (s.dt / (2 * kPi));
  }
  return s;
}

// alpha_n G(y_n, x_s) per carried bin and scatterer.
std::vector<std::vector<CMat3d>> scatter_right(const Scene& scene, const SourceSpectrum& s, double c) {
  std::vector<std::vector<CMat3d>> out(s.bins.size());
  for (std::size_t q = 0; q < s.bins.size(); ++q) {
    const double k = 2 * kPi * s.bins[q] / (s.m * s.dt) / c;
    for (const auto& sc : scene.scatterers)
      out[q].push_back(sc.alpha * dyadic_green_unchecked<double>(sc.position - scene.source.position, k));
  }
  return out;
}

// Received field at one receiver, first n samples of the padded linear convolution.
Eigen::MatrixXd receive(const Scene& scene, const Vec3d& xr, const SourceSpectrum& s,
                        const std::vector<std::vector<CMat3d>>& right, double c, int rows, Eigen::FFT<double>& fft) {
  const double dw = 2 * kPi / (s.m * s.dt);
  std::vector<CVec> E(rows, CVec(s.m, cd(0)));
  for (std::size_t q = 0; q < s.bins.size(); ++q) {
    const double k = 2 * kPi * s.bins[q] / (s.m * s.dt) / c;
    CMat3d T = dyadic_green_unchecked<double>(xr - scene.source.position, k);
    for (std::size_t n = 0; n < scene.scatterers.size(); ++n)
      T.noalias() += dyadic_green_unchecked<double>(xr - scene.scatterers[n].position, k) * right[q][n];
    const CVec3d jv(s.j[q][0], s.j[q][1], s.j[q][2]);
    const CVec3d e = T * jv;
    for (int r = 0; r < rows; ++r) E[r][s.bins[q]] = e(r);
  }
  Eigen::MatrixXd out(rows, s.n);
  CVec t;
  for (int r = 0; r < rows; ++r) {
    fft.fwd(t, E[r]);
    // Negative frequencies are the conjugates, so the sum is twice the real part.
    for (int i = 0; i < s.n; ++i) out(r, i) = 2 * dw * t[i].real();
  }
  return out;
}

}  // namespace

std::vector<TimeSignal> simulate_received(const Scene& scene, const TimeSignal& source,
                                          const std::vector<std::size_t>& receivers, double c) {
  if (source.channels() != 3) throw ValidationError("source signal must have three channels");
  std::vector<std::size_t> idx = receivers;
  if (idx.empty())
    for (std::size_t r = 0; r < scene.array.count(); ++r) idx.push_back(r);
  const SourceSpectrum s = source_spectrum(source);
  const auto right = scatter_right(scene, s, c);
  std::vector<TimeSignal> out(idx.size());
  const long n = long(idx.size());
#pragma omp parallel num_threads(threads())
  {
    Eigen::FFT<double> fft;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      out[i].dt = source.dt;
      out[i].t0 = source.t0;
      out[i].samples = receive(scene, scene.array.receiver(idx[i]), s, right, c, 3, fft);
    }
  }
  return out;
}

namespace {

void check_window(const TimeSignal& s, const AutocorrelationOptions& w) {
  if (w.window_length < 2 || w.window_start < 0 || w.window_start + w.window_length > s.length())
    throw ValidationError("autocorrelation window exceeds the signal");
  if (s.channels() < 2) throw ValidationError("autocorrelation needs the two cross-range channels");
}

// Windowed spectra E_T on the window's own grid for channels 0 and 1.
std::array<CVec, 2> window_spectra(const TimeSignal& s, const AutocorrelationOptions& w, Eigen::FFT<double>& fft) {
  std::array<CVec, 2> out;
  for (int c = 0; c < 2; ++c) {
    CVec x(w.window_length);
    for (int i = 0; i < w.window_length; ++i) x[i] = s.samples(c, w.window_start + i);
    CVec X;
    fft.fwd(X, x);
    for (auto& z : X) z = std::conj(z) * (s.dt / (2 * kPi));
    out[c] = std::move(X);
  }
  return out;
}

std::vector<CMat2d> bins_from_spectra(const std::array<CVec, 2>& E, double two_T, int lo, int hi, int smooth) {
  const int nw = int(E[0].size());
  if (lo < 1 || hi < lo || hi > nw / 2) throw ValidationError("frequency bins outside the window spectrum");
  const double scale = 2 * kPi / two_T;
  auto raw = [&](int b) {
    CMat2d P;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) P(i, j) = scale * E[i][b] * std::conj(E[j][b]);
    return P;
  };
  std::vector<CMat2d> out;
  out.reserve(hi - lo + 1);
  for (int b = lo; b <= hi; ++b) {
    CMat2d acc = CMat2d::Zero();
    int cnt = 0;
    for (int q = std::max(1, b - smooth); q <= std::min(nw / 2, b + smooth); ++q, ++cnt) acc += raw(q);
    out.push_back(acc / double(cnt));
  }
  return out;
}

}  // namespace

std::vector<Eigen::Matrix2d> empirical_autocorrelation_lags(const TimeSignal& s, const AutocorrelationOptions& w,
                                                            const std::vector<int>& lags) {
  check_window(s, w);
  const int nw = w.window_length;
  const int m = fft_friendly(2 * nw);
  Eigen::FFT<double> fft;
  std::array<CVec, 2> F;
  for (int c = 0; c < 2; ++c) {
    CVec x(m, cd(0));
    for (int i = 0; i < nw; ++i) x[i] = s.samples(c, w.window_start + i);
    fft.fwd(F[c], x);
  }
  std::vector<Eigen::Matrix2d> out(lags.size(), Eigen::Matrix2d::Zero());
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      CVec prod(m), corr;
      for (int q = 0; q < m; ++q) prod[q] = F[a][q] * std::conj(F[b][q]);
      fft.inv(corr, prod);
      for (std::size_t l = 0; l < lags.size(); ++l) {
        if (lags[l] < 0 || lags[l] >= nw) throw ValidationError("lag outside the window");
        out[l](a, b) = corr[lags[l]].real() / nw;
      }
    }
  return out;
}

std::vector<CMat2d> empirical_autocorrelation_bins(const TimeSignal& s, const AutocorrelationOptions& w, int lo, int hi,
                                                   int smooth) {
  check_window(s, w);
  Eigen::FFT<double> fft;
  return bins_from_spectra(window_spectra(s, w, fft), w.window_length * s.dt, lo, hi, smooth);
}

FrequencyBand BinRange::band(double wave_speed) const {
  FrequencyBand b;
  b.omega0 = 0.5 * (lo + hi) * domega;
  b.bandwidth = (hi - lo) * domega;
  b.samples = hi - lo + 1;
  b.wave_speed = wave_speed;
  return b;
}

BinRange snap_band(const SourceProcessSpec& spec, double omega_lo, double omega_hi) {
  BinRange r;
  r.domega = 2 * kPi / (spec.window_samples() * spec.dt);
  r.lo = std::max(1, int(std::ceil(omega_lo / r.domega - 1e-9)));
  r.hi = std::min(spec.window_samples() / 2, int(std::floor(omega_hi / r.domega + 1e-9)));
  if (r.hi < r.lo) throw ValidationError("band holds no window frequency bins");
  return r;
}

double required_lead(const Scene& scene, const SourceProcessSpec& spec, double c) {
  double longest = 0;
  const Vec3d xs = scene.source.position;
  for (std::size_t r = 0; r < scene.array.count(); ++r) {
    const Vec3d xr = scene.array.receiver(r);
    longest = std::max(longest, (xr - xs).norm());
    for (const auto& sc : scene.scatterers)
      longest = std::max(longest, (xr - sc.position).norm() + (sc.position - xs).norm());
  }
  return longest / c + 5 * spec.tc;
}

ArrayDataSet stochastic_coherency(const Scene& scene, const SourceProcessSpec& spec_in, double omega_lo, double omega_hi,
                                  std::uint64_t stream, int smooth, double c) {
  scene.validate();
  SourceProcessSpec spec = spec_in;
  spec.lead = std::max(spec.lead, required_lead(scene, spec, c));
  const BinRange bins = snap_band(spec, omega_lo, omega_hi);
  const TimeSignal src = synth_source(spec, scene.source.basis(), stream);

  // Carry only bins where the source has power.
  const int m = fft_friendly(2 * src.length());
  std::vector<int> carried;
  for (int b = 1; b <= m / 2; ++b)
    if (spec.spectrum(2 * kPi * b / (m * src.dt)) > 1e-12) carried.push_back(b);
  const SourceSpectrum s = source_spectrum(src, &carried);
  const auto right = scatter_right(scene, s, c);

  SourceSpec source = scene.source;
  const FrequencyBand band = bins.band(c);
  source.coherency.clear();
  for (int f = 0; f < band.samples; ++f)
    source.coherency.push_back(spec.spectrum((bins.lo + f) * bins.domega) * CMat2d::Identity());
  ArrayDataSet ds(DataKind::coherency2x2, scene.array, source, band);

  AutocorrelationOptions w;
  w.window_start = spec.lead_samples();
  w.window_length = spec.window_samples();
  const long nr = long(scene.array.count());
#pragma omp parallel num_threads(threads())
  {
    Eigen::FFT<double> fft;
#pragma omp for schedule(static)
    for (long r = 0; r < nr; ++r) {
      TimeSignal rec;
      rec.dt = src.dt;
      rec.samples = receive(scene, scene.array.receiver(std::size_t(r)), s, right, c, 2, fft);
      const auto E = window_spectra(rec, w, fft);
      const auto P = bins_from_spectra(E, w.window_length * src.dt, bins.lo, bins.hi, smooth);
      for (int f = 0; f < band.samples; ++f) ds.set(std::size_t(r), f, CMat2d((P[f] + P[f].adjoint()) * 0.5));
    }
  }
  return ds;
}

namespace {

double sample_variance(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / double(x.size() - 1);
}

// Mean over features of the across-realization variance; rows index realizations.
double pooled_variance(const std::vector<std::vector<double>>& rows, const std::vector<int>& pick) {
  const std::size_t nfeat = rows.front().size();
  double acc = 0;
  std::vector<double> col(pick.size());
  for (std::size_t q = 0; q < nfeat; ++q) {
    for (std::size_t i = 0; i < pick.size(); ++i) col[i] = rows[pick[i]][q];
    acc += sample_variance(col);
  }
  return acc / double(nfeat);
}

}  // namespace

double bootstrap_variance_se(const std::vector<double>& x, int resamples, std::uint64_t seed) {
  if (x.size() < 2 || resamples < 2) throw ValidationError("bootstrap needs two samples and two resamples");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> est(resamples), draw(x.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto& v : draw) v = x[pick(rng)];
    est[b] = sample_variance(draw);
  }
  return std::sqrt(sample_variance(est));
}

std::string ErgodicityResult::csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "T,variance,variance_se\n";
  for (const auto& r : rows) os << r.T << ',' << r.variance << ',' << r.variance_se << '\n';
  os << "# slope," << slope << '\n';
  return os.str();
}

ErgodicityResult ergodicity_probe(const Scene& scene, const SourceProcessSpec& base, const ErgodicityOptions& opt) {
  if (opt.T_ladder.size() < 3) throw ValidationError("ergodicity probe needs at least three window lengths");
  if (opt.realizations < 30) throw ValidationError("ergodicity probe needs at least 30 realizations");
  if (opt.lags.empty()) throw ValidationError("ergodicity probe needs at least one lag");
  if (opt.receiver >= scene.array.count()) throw ValidationError("probe receiver index out of range");
  scene.validate();
  ErgodicityResult res;
  const Vec3d xr = scene.array.receiver(opt.receiver);
  for (std::size_t t = 0; t < opt.T_ladder.size(); ++t) {
    SourceProcessSpec spec = base;
    spec.T = opt.T_ladder[t];
    spec.lead = std::max(spec.lead, required_lead(scene, spec, opt.wave_speed));
    spec.validate();
    std::vector<int> lag_idx;
    for (double tau : opt.lags) lag_idx.push_back(int(std::lround(tau / spec.dt)));
    AutocorrelationOptions w;
    w.window_start = spec.lead_samples();
    w.window_length = spec.window_samples();

    std::vector<std::vector<double>> feats(opt.realizations);
#pragma omp parallel num_threads(threads())
    {
      Eigen::FFT<double> fft;
#pragma omp for schedule(static)
      for (int r = 0; r < opt.realizations; ++r) {
        const std::uint64_t stream = (std::uint64_t(t + 1) << 32) | std::uint64_t(r);
        const TimeSignal src = synth_source(spec, scene.source.basis(), stream);
        const SourceSpectrum s = source_spectrum(src);
        const auto right = scatter_right(scene, s, opt.wave_speed);
        TimeSignal rec;
        rec.dt = src.dt;
        rec.samples = receive(scene, xr, s, right, opt.wave_speed, 2, fft);
        for (const auto& M : empirical_autocorrelation_lags(rec, w, lag_idx))
          for (int i = 0; i < 4; ++i) feats[r].push_back(M.data()[i]);
      }
    }
    std::vector<int> all(opt.realizations);
    for (int i = 0; i < opt.realizations; ++i) all[i] = i;
    ErgodicityRow row;
    row.T = spec.T;
    row.variance = pooled_variance(feats, all);
    std::mt19937_64 rng(base.seed ^ (0x9e3779b97f4a7c15ULL * (t + 1)));
    std::uniform_int_distribution<int> pick(0, opt.realizations - 1);
    std::vector<double> boot(200);
    std::vector<int> sel(opt.realizations);
    for (auto& b : boot) {
      for (auto& v : sel) v = pick(rng);
      b = pooled_variance(feats, sel);
    }
    row.variance_se = std::sqrt(sample_variance(boot));
    res.rows.push_back(row);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(res.rows.size());
  for (const auto& r : res.rows) {
    const double x = std::log(r.T), y = std::log(r.variance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return res;
}

void timeseries_write(const std::string& path, const TimeSignal& s) {
  std::vector<double> payload;
  payload.reserve(std::size_t(s.channels()) * s.length());
  for (int c = 0; c < s.channels(); ++c)
    for (int i = 0; i < s.length(); ++i) payload.push_back(s.samples(c, i));
  json h;
  h["kind"] = "timeseries";
  h["channels"] = s.channels();
  h["length"] = s.length();
  h["dt"] = s.dt;
  h["t0"] = s.t0;
  h["payload_doubles"] = payload.size();
  container_write(path, h.dump(), payload);
}

TimeSignal timeseries_read(const std::string& path) {
  const Container c = container_read(path);
  const json h = json::parse(c.header);
  try {
    if (h.at("kind").get<std::string>() != "timeseries") throw FormatError("not a timeseries file");
    TimeSignal s;
    const int ch = h.at("channels").get<int>(), len = h.at("length").get<int>();
    if (c.payload.size() != std::size_t(ch) * len) throw FormatError("dimension mismatch between header and payload");
    s.dt = h.at("dt").get<double>();
    s.t0 = h.at("t0").get<double>();
    s.samples.resize(ch, len);
    for (int k = 0; k < ch; ++k)
      for (int i = 0; i < len; ++i) s.samples(k, i) = c.payload[std::size_t(k) * len + i];
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed timeseries header: ") + e.what());
  }
}

}  // namespace polarmig
