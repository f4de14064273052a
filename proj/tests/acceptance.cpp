// Acceptance run: one line per criterion, nonzero exit when any fails.
// Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "polarmig/pipeline.hpp"
#include "support.hpp"

using namespace polarmig;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

double frob_rel(const CMat3d& a, const CMat3d& b) { return (a - b).norm() / b.norm(); }

// 1. p(Psi) - U_par Pi~ U_s^T equals the closed-form error, random scenes.
Outcome preprocessing_exactness() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> count(1, 5);
  std::uniform_real_distribution<double> u(-12, 12);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Scene s = paper_scene(9, false);
    const int n = count(rng);
    for (int i = 0; i < n; ++i)
      s.scatterers.push_back({Vec3d(u(rng), u(rng), 100 + u(rng)) * lambda0, random_symmetric(rng)});
    const FrequencyBand b = paper_band(3);
    const ArrayDataSet p = preprocess(coherency_synthesize(s, b, false));
    const ArrayDataSet proj = response_dataset(s, b, true, false);
    const ArrayDataSet q = expected_error(response_dataset(s, b, false, false));
    for (std::size_t r = 0; r < s.array.count(); ++r)
      for (int f = 0; f < b.samples; ++f) {
        const CMat3d P = p.mat3(r, f);
        const CMat3d d = P - proj.mat3(r, f) - q.mat3(r, f);
        worst = std::max(worst, d.cwiseAbs().maxCoeff() / P.cwiseAbs().maxCoeff());
      }
  }
  return {worst <= 1e-11, "max entrywise relative residual " + fmt("%.2e", worst) + " (tol 1e-11)"};
}

// 2. Discrepancy between images of p(Psi) and of the projected response at y*, per wavenumber.
Outcome theorem_ladder() {
  const Vec3d y = reference();
  std::vector<double> err;
  for (double k : {k0 / 2, k0, 2 * k0}) {
    Scene s = paper_scene(241, false);
    s.scatterers = {{y, alpha1()}};
    const FrequencyBand b = single(k);
    const ImageField ip = migrate_points(preprocess(coherency_synthesize(s, b, false)), {y}, {false});
    const ImageField id = migrate_points(response_dataset(s, b, true, false), {y}, {false});
    err.push_back(frob_rel(ip.raw[0], id.raw[0]));
  }
  const bool pass = err[0] > err[1] && err[1] > err[2] && err[2] <= 0.1;
  return {pass, "e(k0/2) " + fmt("%.4f", err[0]) + ", e(k0) " + fmt("%.4f", err[1]) + ", e(2k0) " + fmt("%.4f", err[2]) +
                    " (strictly decreasing, last <= 0.1)"};
}

// Index of the largest value, lowest index on ties.
std::size_t argmax(const std::vector<double>& v) {
  std::size_t b = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[b]) b = i;
  return b;
}

// Every scatterer must be the image maximum over a 3x3x3 block of grid cells around it.
bool located(const ArrayDataSet& ds, const std::vector<Vec3d>& at, double cross_step, double range_step, std::string& note) {
  bool ok = true;
  for (std::size_t n = 0; n < at.size(); ++n) {
    const ImageGrid g = ImageGrid::volume(at[n] - Vec3d(cross_step, cross_step, range_step), Vec3d(cross_step, 0, 0), 3,
                                          Vec3d(0, cross_step, 0), 3, Vec3d(0, 0, range_step), 3);
    const ImageField f = migrate(ds, g, {false});
    const std::size_t p = argmax(f.raw_norm);
    if (p != 13) {
      ok = false;
      note += " scatterer " + std::to_string(n + 1) + " peak off by cell " + std::to_string(p);
    }
  }
  return ok;
}

// 3. Paper tensor norms from preprocessed coherency, 61x61 receivers and 501 frequencies.
Outcome paper_norms() {
  const Scene s = paper_scene(61);
  const ArrayDataSet pre = preprocess(coherency_synthesize(s, paper_band(501), false));
  const auto pos = dipole_positions();
  const std::vector<Vec3d> pts(pos.begin(), pos.end());
  const ImageField f = migrate_points(pre, pts);
  const auto corrected = phase_correct(f.alpha, 1e-6);
  const double want[3] = {3.44, 3.93, 3.82};
  bool pass = true;
  std::string d = "norms";
  for (int n = 0; n < 3; ++n) {
    const double got = corrected[n].norm();
    pass = pass && std::abs(got / want[n] - 1) <= 0.1;
    d += " " + fmt("%.3f", got) + "/" + fmt("%.2f", want[n]);
  }
  std::string note;
  const bool loc = located(pre, pts, lambda0 / 2, lambda0 / 4, note);
  return {pass && loc, d + " (within 10%)" + (loc ? ", peaks at the true cells" : note)};
}

// 4. First cross-range null of |I_KM| near lambda0 L / a.
Outcome cross_range_null() {
  Scene s = paper_scene(61, false);
  s.scatterers = {{reference(), alpha1()}};
  const ArrayDataSet d = response_dataset(s, single(k0), true, false);
  const double step = lambda0 / 4;
  const ImageField f = migrate(d, ImageGrid::line(reference(), Vec3d(step, 0, 0), 41), {false});
  int null = -1;
  for (int i = 1; i + 1 < 41; ++i)
    if (f.raw_norm[i] < f.raw_norm[i - 1] && f.raw_norm[i] <= f.raw_norm[i + 1]) {
      null = i;
      break;
    }
  const double want = L * lambda0 / aperture;
  const double got = null * step;
  const bool pass = null > 0 && std::abs(got - want) <= step;
  return {pass, "first null at " + fmt("%.3f", got / lambda0) + " lambda0, predicted " + fmt("%.3f", want / lambda0) +
                    " lambda0 (grid " + fmt("%.2f", step / lambda0) + " lambda0)"};
}

// 5. Range null against the root of B (phi(eta) - phi(eta*)) = 2 pi c.
Outcome range_null() {
  Scene s = paper_scene(31, false);
  const Vec3d y = reference();
  s.scatterers = {{y, alpha1()}};
  const FrequencyBand b = paper_band(128);
  const ArrayDataSet d = response_dataset(s, b, true, false);
  const double step = lambda0 / 40;
  const ImageField f = migrate(d, ImageGrid::line(y, Vec3d(0, 0, step), 81), {false});
  int null = -1;
  for (int i = 1; i + 1 < 81; ++i)
    if (f.raw_norm[i] < f.raw_norm[i - 1] && f.raw_norm[i] <= f.raw_norm[i + 1]) {
      null = i;
      break;
    }
  const Vec3d xs = s.source.position;
  auto phi = [&](double eta) { return eta + (xs - (y + Vec3d(0, 0, eta))).norm(); };
  const double target = 2 * pi * c0 / b.bandwidth;
  double lo = 0, hi = 2 * lambda0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (phi(mid) - phi(0) < target ? lo : hi) = mid;
  }
  const double want = 0.5 * (lo + hi), got = null * step;
  const bool pass = null > 0 && std::abs(got / want - 1) <= 0.2;
  return {pass, "first range null at " + fmt("%.3f", got / lambda0) + " lambda0, predicted " + fmt("%.3f", want / lambda0) +
                    " lambda0 (within 20%)"};
}

double angle_at(const Vec3d& p, const Vec3d& a, const Vec3d& b) {
  const Vec3d u = (a - p).normalized(), v = (b - p).normalized();
  return std::acos(std::clamp(u.dot(v), -1.0, 1.0));
}

// 6. SVD condition of the projector product on random triangles.
Outcome condition_lemma() {
  const double eq = projected_green_condition<double>(Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(0.5, std::sqrt(0.75), 0));
  std::mt19937_64 rng(106);
  std::normal_distribution<double> n;
  double worst = 0;
  int tested = 0;
  while (tested < 200) {
    const Vec3d a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng)), c(n(rng), n(rng), n(rng));
    const double cr = std::cos(angle_at(a, b, c)), cs = std::cos(angle_at(b, a, c));
    if (std::abs(cr * cs) < 1e-3 || (b - a).cross(c - a).norm() < 1e-3) continue;
    ++tested;
    const double want = 1 / std::abs(cr * cs);
    worst = std::max(worst, std::abs(projected_green_condition<double>(a, b, c) / want - 1));
  }
  const bool pass = worst <= 1e-10 && std::abs(eq - 4.0) <= 1e-10;
  return {pass, "equilateral " + fmt("%.12f", eq) + ", worst relative error " + fmt("%.2e", worst) + " over 200 triangles"};
}

// 7. Sidelobe envelope of the receiver spreading matrix along both cross-range axes.
Outcome hr_decay() {
  const ArrayGeom a{aperture, 61, 61};
  const Wavenumberd k(k0);
  const Vec3d y = reference();
  const double step = lambda0 / 20;
  std::vector<double> cs;
  std::string d;
  for (const Vec3d dir : {Vec3d::UnitX().eval(), Vec3d::UnitY().eval()}) {
    std::vector<double> delta, norm;
    for (double dd = 4.5 * lambda0; dd <= 15.5 * lambda0; dd += step) {
      delta.push_back(dd);
      norm.push_back(h_r(y, y + dd * dir, k, a).norm());
    }
    int peaks = 0;
    for (std::size_t i = 1; i + 1 < norm.size(); ++i) {
      if (delta[i] < 5 * lambda0 || delta[i] > 15 * lambda0) continue;
      if (norm[i] >= norm[i - 1] && norm[i] > norm[i + 1]) {
        const double bound = (aperture * aperture / (L * L)) * L / (aperture * k0 * delta[i]);
        cs.push_back(norm[i] / bound);
        d += " " + fmt("%.2f", delta[i] / lambda0);
        ++peaks;
      }
    }
    if (peaks < 2) return {false, "fewer than two sidelobes along an axis"};
  }
  double mean = 0;
  for (double c : cs) mean += c;
  mean /= double(cs.size());
  double dev = 0;
  for (double c : cs) dev = std::max(dev, std::abs(c / mean - 1));
  return {dev <= 0.3, "sidelobes at" + d + " lambda0, fitted C " + fmt("%.4e", mean) + ", largest departure " +
                          fmt("%.1f%%", 100 * dev) + " (within 30%)"};
}

// 8. Ergodicity slope and the ensemble mean of the frequency estimator.
Outcome statistical_stability() {
  Scene s = paper_scene(2);
  SourceProcessSpec spec;
  spec.tc = 1e-9;
  spec.omega0 = omega0;
  spec.dt = 66.5e-12;
  spec.seed = 8;
  ErgodicityOptions opt;
  opt.T_ladder = {64e-9, 128e-9, 256e-9};
  opt.realizations = 50;
  opt.lags = {0.0, 0.1e-9, 0.2e-9, 0.5e-9};
  opt.wave_speed = c0;
  const ErgodicityResult er = ergodicity_probe(s, spec, opt);
  const bool slope_ok = er.slope >= -1.3 && er.slope <= -0.7;

  spec.T = 266e-9;
  const int realizations = 100, smooth = 5;
  const double lo = omega0 - 0.05 * omega0, hi = omega0 + 0.05 * omega0;
  CMat2d mean = CMat2d::Zero();
  ArrayDataSet first = stochastic_coherency(s, spec, lo, hi, 0, smooth, c0);
  const FrequencyBand band = first.band();
  int center = 0;
  for (int f = 1; f < band.samples; ++f)
    if (std::abs(band.omega(f) - omega0) < std::abs(band.omega(center) - omega0)) center = f;
  for (int r = 0; r < realizations; ++r) {
    const ArrayDataSet d = r == 0 ? first : stochastic_coherency(s, spec, lo, hi, std::uint64_t(r), smooth, c0);
    mean += d.mat2(0, center);
  }
  mean /= double(realizations);
  const double wc = band.omega(center);
  const auto det = coherency_at(s, Wavenumberd(wc / c0), CMat2d(spec.spectrum(wc) * CMat2d::Identity()), false);
  const double err = (mean - det[0]).norm() / det[0].norm();
  std::ostringstream os;
  os << "slope " << fmt("%.3f", er.slope) << " (in [-1.3, -0.7]), mean error at omega0 " << fmt("%.1f%%", 100 * err)
     << " (within 10%)";
  return {slope_ok && err <= 0.1, os.str()};
}

// 9. Three dipoles from one stochastic acquisition.
Outcome stochastic_end_to_end() {
  Scene s = paper_scene(31);
  SourceProcessSpec spec;
  spec.tc = 1e-9;
  spec.omega0 = omega0;
  spec.T = 266e-9;
  spec.dt = 66.5e-12;
  spec.seed = 9;
  const ArrayDataSet co = stochastic_coherency(s, spec, 2 * pi * 1.2e9, 2 * pi * 3.6e9, 0, 0, c0);
  const ArrayDataSet pre = preprocess(co);
  const auto pos = dipole_positions();
  const std::vector<Vec3d> pts(pos.begin(), pos.end());
  const auto corrected = phase_correct(migrate_points(pre, pts).alpha, 1e-6);
  const double want[3] = {3.44, 3.93, 3.82};
  bool pass = true;
  std::string d = std::to_string(co.frequencies()) + " bins, norms";
  for (int n = 0; n < 3; ++n) {
    const double got = corrected[n].norm();
    pass = pass && std::abs(got / want[n] - 1) <= 0.2;
    d += " " + fmt("%.3f", got) + "/" + fmt("%.2f", want[n]);
  }
  std::string note;
  const bool loc = located(pre, pts, lambda0 / 2, lambda0 / 4, note);
  return {pass && loc, d + " (within 20%)" + (loc ? ", peaks at the true cells" : note)};
}

// 10. Full response against projected response at the scatterers.
Outcome partial_data() {
  const Scene s = paper_scene(61);
  const FrequencyBand b = single(k0);
  const auto pos = dipole_positions();
  const std::vector<Vec3d> pts(pos.begin(), pos.end());
  const ImageField full = migrate_points(response_dataset(s, b, false, false), pts, {false});
  const ImageField part = migrate_points(response_dataset(s, b, true, false), pts, {false});
  double worst = 0;
  std::string d = "relative differences";
  for (int n = 0; n < 3; ++n) {
    const double e = frob_rel(full.raw[n], part.raw[n]);
    worst = std::max(worst, e);
    d += " " + fmt("%.3f", e);
  }
  return {worst <= 0.15, d + " (within 0.15)"};
}

// 11. Phase correction along a range profile through a real symmetric scatterer.
Outcome phase_correction() {
  Scene s = paper_scene(31, false);
  Mat3d a;
  a << 2, 1, 0.5, 1, 1.5, 0.3, 0.5, 0.3, 1;
  const Vec3d y = reference();
  s.scatterers = {{y, a.cast<cd>()}};
  const FrequencyBand b = paper_band(64);
  const ArrayDataSet pre = preprocess(coherency_synthesize(s, b, false));
  const double cb = c0 / b.bandwidth;
  const int half = 40;
  const double step = cb / half;
  const ImageField f = migrate(pre, ImageGrid::line(y - half * step * Vec3d::UnitZ(), step * Vec3d::UnitZ(), 2 * half + 1));
  const double delta_rel = 1e-6;
  const auto corr = phase_correct(f.alpha, delta_rel);
  double peak11 = 0;
  for (const auto& m : f.alpha) peak11 = std::max(peak11, std::abs(m(0, 0)));
  const double delta = delta_rel * peak11;
  double worst_arg = 0;
  for (const auto& m : corr)
    if (std::abs(m(0, 0)) > 1e3 * delta) worst_arg = std::max(worst_arg, std::abs(std::arg(m(0, 0))));
  auto sign_changes = [&](const std::vector<CMat2d>& v) {
    int count = 0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (std::size_t p = 1; p < v.size(); ++p)
          if ((v[p - 1](i, j).real() > 0) != (v[p](i, j).real() > 0)) ++count;
    return count;
  };
  const int before = sign_changes(f.alpha), after = sign_changes(corr);
  const bool pass = worst_arg <= 1e-10 && after == 0 && before >= 2;
  return {pass, "max |arg a11| " + fmt("%.1e", worst_arg) + ", sign changes within c/B " + std::to_string(before) +
                    " before, " + std::to_string(after) + " after"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 12. The same config and seed under different thread counts.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "polarmig_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ifstream in(fs::path(POLARMIG_SOURCE_DIR) / "configs" / "paper_deterministic.json");
  nlohmann::json j = nlohmann::json::parse(in);
  j["array"]["receivers"] = {11, 11};
  j["frequency"]["samples"] = 16;
  j["window"]["step"] = "1 lambda0";
  const fs::path cfg = root / "config.json";
  std::ofstream(cfg) << j.dump(2);
  nlohmann::json sj = j;
  sj["array"]["receivers"] = {4, 4};
  sj["pipeline"]["stochastic"] = true;
  sj["stochastic"] = {{"tc", 1e-9}, {"T", 64e-9}, {"samples", 2000}};
  const fs::path scfg = root / "stochastic.json";
  std::ofstream(scfg) << sj.dump(2);

  auto run = [&](const std::string& threads, const std::string& tag) {
    const std::string env = "POLARMIG_THREADS=" + threads + " ";
    const std::string bin = std::string("\"") + POLARMIG_CLI + "\"";
    const std::string a = env + bin + " run -c \"" + cfg.string() + "\" -o \"" + (root / tag).string() + "\" >/dev/null 2>&1";
    const std::string b = env + bin + " stochastic -c \"" + scfg.string() + "\" -o \"" + (root / tag / "stochastic.pmg").string() +
                          "\" >/dev/null 2>&1";
    return std::system(a.c_str()) == 0 && std::system(b.c_str()) == 0;
  };
  if (!run("1", "one") || !run("4", "four")) return {false, "command failed"};
  int files = 0, differ = 0;
  for (const auto& e : fs::directory_iterator(root / "one")) {
    const std::string name = e.path().filename().string();
    if (name == "config.json") continue;
    ++files;
    if (slurp(e.path()) != slurp(root / "four" / name)) ++differ;
  }
  return {differ == 0 && files > 10, std::to_string(files) + " artifacts compared across 1 and 4 threads, " +
                                          std::to_string(differ) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"preprocessing exactness", preprocessing_exactness},
      {"imaging error ladder in k", theorem_ladder},
      {"paper tensor norms", paper_norms},
      {"cross-range resolution", cross_range_null},
      {"range resolution", range_null},
      {"condition-number lemma", condition_lemma},
      {"receiver spreading decay", hr_decay},
      {"statistical stability", statistical_stability},
      {"stochastic end to end", stochastic_end_to_end},
      {"partial-data equivalence", partial_data},
      {"phase correction", phase_correction},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(), sec);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
