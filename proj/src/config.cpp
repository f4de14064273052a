#include "polarmig/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "polarmig/serialize.hpp"

namespace polarmig {

using nlohmann::json;

double parse_length(const json& v, double lambda0, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw ValidationError("field '" + field + "': length must be a number or a string");
  std::istringstream is(v.get<std::string>());
  double x = 0;
  std::string unit;
  if (!(is >> x)) throw ValidationError("field '" + field + "': cannot read a number from '" + v.get<std::string>() + "'");
  is >> unit;
  std::string rest;
  if (is >> rest) throw ValidationError("field '" + field + "': trailing text in '" + v.get<std::string>() + "'");
  if (unit.empty() || unit == "m") return x;
  if (unit == "lambda0" || unit == "lambda") return x * lambda0;
  throw ValidationError("field '" + field + "': unknown unit '" + unit + "'");
}

namespace {

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError("missing field '" + path + key + "'");
  return j.at(key);
}

template <typename T> T get_or(const json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("field '" + path + key + "': wrong type");
  }
}

Vec3d parse_point(const json& v, double lam, const std::string& field) {
  if (!v.is_array() || v.size() != 3) throw ValidationError("field '" + field + "': expected three coordinates");
  Vec3d p;
  for (int i = 0; i < 3; ++i) p(i) = parse_length(v[i], lam, field);
  return p;
}

template <typename F> auto guarded(const std::string& field, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError("field '" + field + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  c.source_json = j;
  c.name = get_or<std::string>(j, "name", c.name, "");
  c.wave_speed = get_or<double>(j, "wave_speed", c.wave_speed, "");
  if (!(c.wave_speed > 0)) throw ValidationError("field 'wave_speed': must be positive");

  const json& fr = need(j, "frequency", "");
  const double f0 = guarded("frequency.center_hz", [&] { return need(fr, "center_hz", "frequency.").get<double>(); });
  if (!(f0 > 0)) throw ValidationError("field 'frequency.center_hz': must be positive");
  c.lambda0 = c.wave_speed / f0;
  const double lam = c.lambda0;
  c.band.omega0 = 2 * kPi * f0;
  c.band.bandwidth = 2 * kPi * get_or<double>(fr, "bandwidth_hz", 0.0, "frequency.");
  c.band.samples = get_or<int>(fr, "samples", 1, "frequency.");
  c.band.wave_speed = c.wave_speed;
  guarded("frequency", [&] { c.band.validate(); return 0; });

  const json& win = need(j, "window", "");
  c.scene.window.center = parse_point(need(win, "center", "window."), lam, "window.center");
  c.scene.window.cross = parse_length(need(win, "cross", "window."), lam, "window.cross");
  c.scene.window.range = parse_length(need(win, "range", "window."), lam, "window.range");
  c.window_step = parse_length(need(win, "step", "window."), lam, "window.step");
  if (!(c.window_step > 0)) throw ValidationError("field 'window.step': must be positive");
  c.scene.window.n_cross = int(std::lround(c.scene.window.cross / c.window_step)) + 1;
  c.scene.window.n_range = int(std::lround(c.scene.window.range / c.window_step)) + 1;

  const json& arr = need(j, "array", "");
  c.scene.array.side = parse_length(need(arr, "side", "array."), lam, "array.side");
  const json& rx = need(arr, "receivers", "array.");
  if (!rx.is_array() || rx.size() != 2) throw ValidationError("field 'array.receivers': expected [n1, n2]");
  c.scene.array.n1 = rx[0].get<int>();
  c.scene.array.n2 = rx[1].get<int>();
  guarded("array", [&] { c.scene.array.validate(); return 0; });

  const json& src = need(j, "source", "");
  c.scene.source.reference = c.scene.window.center;
  if (src.contains("position")) {
    c.scene.source.position = parse_point(src.at("position"), lam, "source.position");
  } else if (src.contains("polar")) {
    // Placement by distance from the window center and tilt from the -x3 axis toward +x1.
    const json& p = src.at("polar");
    const double d = parse_length(need(p, "distance", "source.polar."), lam, "source.polar.distance");
    const double th = need(p, "angle_deg", "source.polar.").get<double>() * kPi / 180;
    c.scene.source.position = c.scene.window.center + d * Vec3d(std::sin(th), 0, -std::cos(th));
  } else {
    throw ValidationError("field 'source': needs 'position' or 'polar'");
  }
  if (src.contains("coherency"))
    c.scene.source.coherency = {guarded("source.coherency", [&] { return cmat2_from_json(src.at("coherency")); })};

  if (j.contains("scatterers")) {
    const json& list = j.at("scatterers");
    for (std::size_t n = 0; n < list.size(); ++n) {
      const std::string p = "scatterers[" + std::to_string(n) + "].";
      Scatterer s;
      s.position = parse_point(need(list[n], "position", p), lam, p + "position");
      s.alpha = guarded(p + "alpha", [&] { return cmat3_from_json(need(list[n], "alpha", p)); });
      c.scene.scatterers.push_back(s);
    }
  }
  if (j.contains("cube")) {
    const json& cu = j.at("cube");
    const auto cube = build_cube_scene(parse_point(need(cu, "center", "cube."), lam, "cube.center"),
                                       parse_length(need(cu, "side", "cube."), lam, "cube.side"),
                                       parse_length(need(cu, "spacing", "cube."), lam, "cube.spacing"),
                                       guarded("cube.alpha", [&] { return cmat3_from_json(need(cu, "alpha", "cube.")); }));
    c.scene.scatterers.insert(c.scene.scatterers.end(), cube.begin(), cube.end());
  }
  for (std::size_t n = 0; n < c.scene.scatterers.size(); ++n)
    if (!c.scene.window.contains(c.scene.scatterers[n].position, 1e-9))
      throw ValidationError("scatterer " + std::to_string(n) + " lies outside the imaging window");
  guarded("scene", [&] { c.scene.validate(); return 0; });

  if (j.contains("slices")) {
    const json& sl = j.at("slices");
    for (const auto& v : sl.value("cross_range_x3", json::array()))
      c.cross_slices_x3.push_back(parse_length(v, lam, "slices.cross_range_x3"));
    for (const auto& v : sl.value("range_x2", json::array()))
      c.range_slices_x2.push_back(parse_length(v, lam, "slices.range_x2"));
  } else {
    c.cross_slices_x3.push_back(c.scene.window.center.z());
    c.range_slices_x2.push_back(c.scene.window.center.y());
  }

  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    c.second_born = get_or<bool>(p, "second_born", c.second_born, "pipeline.");
    c.stochastic = get_or<bool>(p, "stochastic", c.stochastic, "pipeline.");
    c.write_datasets = get_or<bool>(p, "write_datasets", c.write_datasets, "pipeline.");
    c.gamma = get_or<double>(p, "gamma", c.gamma, "pipeline.");
    if (c.gamma != 1 && c.gamma != 3) throw ValidationError("field 'pipeline.gamma': must be 1 or 3");
    c.delta_rel = get_or<double>(p, "delta_rel", c.delta_rel, "pipeline.");
    if (c.delta_rel < 0) throw ValidationError("field 'pipeline.delta_rel': must be non-negative");
    c.glyph_threshold = get_or<double>(p, "glyph_threshold", c.glyph_threshold, "pipeline.");
    if (c.glyph_threshold < 0 || c.glyph_threshold > 1)
      throw ValidationError("field 'pipeline.glyph_threshold': must lie in [0, 1]");
    const std::string mode = get_or<std::string>(p, "mode", "exact", "pipeline.");
    if (mode == "exact")
      c.mode = RecoveryMode::exact;
    else if (mode == "fraunhofer")
      c.mode = RecoveryMode::fraunhofer;
    else
      throw ValidationError("field 'pipeline.mode': expected 'exact' or 'fraunhofer'");
    const std::string data = get_or<std::string>(p, "data", "coherency", "pipeline.");
    if (data != "coherency" && data != "response")
      throw ValidationError("field 'pipeline.data': expected 'coherency' or 'response'");
    c.use_full_response = data == "response";
  }

  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, "");
  c.process.omega0 = c.band.omega0;
  c.process.seed = c.seed;
  if (j.contains("stochastic")) {
    const json& s = j.at("stochastic");
    c.process.tc = get_or<double>(s, "tc", c.process.tc, "stochastic.");
    c.process.T = get_or<double>(s, "T", c.process.T, "stochastic.");
    const int samples = get_or<int>(s, "samples", 8000, "stochastic.");
    if (samples < 16) throw ValidationError("field 'stochastic.samples': too few samples");
    c.process.dt = 2 * c.process.T / samples;
    c.smooth = get_or<int>(s, "smooth", 0, "stochastic.");
    if (c.smooth < 0) throw ValidationError("field 'stochastic.smooth': must be non-negative");
    if (c.stochastic) guarded("stochastic", [&] { c.process.validate(); return 0; });
    if (s.contains("ergodicity")) {
      const json& e = s.at("ergodicity");
      c.run_ergodicity = true;
      c.ergodicity.T_ladder = get_or<std::vector<double>>(e, "T_ladder", {}, "stochastic.ergodicity.");
      c.ergodicity.realizations = get_or<int>(e, "realizations", 50, "stochastic.ergodicity.");
      c.ergodicity.lags = get_or<std::vector<double>>(e, "lags", {0.0}, "stochastic.ergodicity.");
      c.ergodicity.wave_speed = c.wave_speed;
      const auto r = get_or<std::vector<int>>(e, "receiver", {c.scene.array.n1 / 2, c.scene.array.n2 / 2},
                                              "stochastic.ergodicity.");
      if (r.size() != 2 || r[0] < 0 || r[1] < 0 || r[0] >= c.scene.array.n1 || r[1] >= c.scene.array.n2)
        throw ValidationError("field 'stochastic.ergodicity.receiver': index out of range");
      c.ergodicity.receiver = std::size_t(r[0]) * c.scene.array.n2 + std::size_t(r[1]);
    }
  }
  c.output = get_or<std::string>(j, "output", c.output, "");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

std::string RegimeReport::text() const {
  std::ostringstream os;
  os.precision(6);
  os << "k0 " << k0 << " L " << L << "\n"
     << "Theta_a " << theta_a << "\nTheta_b " << theta_b << "\nTheta_h " << theta_h << "\nkL " << kL << "\nkh " << kh << "\n";
  for (const auto& c : checks) os << (c.pass ? "pass " : "FAIL ") << c.name << " (" << c.lhs << " vs " << c.rhs << ")\n";
  return os.str();
}

RegimeReport regime_report(const ExperimentConfig& cfg) {
  RegimeReport r;
  r.k0 = cfg.band.omega0 / cfg.wave_speed;
  r.L = cfg.scene.window.center.z();
  const double a = cfg.scene.array.side, b = cfg.scene.window.cross, h = cfg.scene.window.range;
  r.theta_a = r.k0 * a * a / r.L;
  r.theta_b = r.k0 * b * b / r.L;
  r.theta_h = r.k0 * h * h / r.L;
  r.kL = r.k0 * r.L;
  r.kh = r.k0 * h;
  auto much_less = [&](const std::string& n, double x, double y) { r.checks.push_back({n, x, y, 10 * x <= y}); };
  much_less("1 << kL", 1, r.kL);
  much_less("Theta_a << kL", r.theta_a, r.kL);
  much_less("Theta_b << kL", r.theta_b, r.kL);
  much_less("Theta_h << kL", r.theta_h, r.kL);
  much_less("Theta_b << 1", r.theta_b, 1);
  much_less("1 << Theta_a", 1, r.theta_a);
  much_less("Theta_a << L^2/a^2", r.theta_a, r.L * r.L / (a * a));
  // kh = O(1): flagged once kh exceeds ten.
  r.checks.push_back({"kh = O(1)", r.kh, 10, r.kh <= 10});
  return r;
}

}  // namespace polarmig
