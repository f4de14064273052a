#include "polarmig/serialize.hpp"

namespace polarmig {

using nlohmann::json;

namespace {

json cplx(const cd& z) { return json::array({z.real(), z.imag()}); }

cd cplx_from(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  throw ValidationError("complex entry must be a number or [re, im]");
}

template <int N> Eigen::Matrix<cd, N, N> cmat_from(const json& j) {
  if (!j.is_array() || j.size() != N) throw ValidationError("matrix must have " + std::to_string(N) + " rows");
  Eigen::Matrix<cd, N, N> M;
  for (int i = 0; i < N; ++i) {
    if (!j[i].is_array() || j[i].size() != N)
      throw ValidationError("matrix row must have " + std::to_string(N) + " entries");
    for (int k = 0; k < N; ++k) M(i, k) = cplx_from(j[i][k]);
  }
  return M;
}

template <int N> json cmat_to(const Eigen::Matrix<cd, N, N>& M) {
  json rows = json::array();
  for (int i = 0; i < N; ++i) {
    json row = json::array();
    for (int k = 0; k < N; ++k) row.push_back(cplx(M(i, k)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

json to_json(const Vec3d& v) { return json::array({v.x(), v.y(), v.z()}); }
json to_json(const CMat2d& m) { return cmat_to<2>(m); }
json to_json(const CMat3d& m) { return cmat_to<3>(m); }

json to_json(const ArrayGeom& a) { return {{"side", a.side}, {"n1", a.n1}, {"n2", a.n2}}; }

json to_json(const SourceSpec& s) {
  json c = json::array();
  for (const auto& m : s.coherency) c.push_back(to_json(m));
  return {{"position", to_json(s.position)}, {"reference", to_json(s.reference)}, {"coherency", c}};
}

json to_json(const FrequencyBand& b) {
  return {{"omega0", b.omega0}, {"bandwidth", b.bandwidth}, {"samples", b.samples}, {"wave_speed", b.wave_speed}};
}

json to_json(const ImagingWindow& w) {
  return {{"center", to_json(w.center)}, {"cross", w.cross}, {"range", w.range}, {"n_cross", w.n_cross}, {"n_range", w.n_range}};
}

Vec3d vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ValidationError("3-vector must be a list of three numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

CMat2d cmat2_from_json(const json& j) { return cmat_from<2>(j); }
CMat3d cmat3_from_json(const json& j) { return cmat_from<3>(j); }

ArrayGeom array_from_json(const json& j) {
  ArrayGeom a;
  a.side = j.at("side").get<double>();
  a.n1 = j.at("n1").get<int>();
  a.n2 = j.at("n2").get<int>();
  return a;
}

SourceSpec source_from_json(const json& j) {
  SourceSpec s;
  s.position = vec3_from_json(j.at("position"));
  s.reference = vec3_from_json(j.at("reference"));
  s.coherency.clear();
  for (const auto& m : j.at("coherency")) s.coherency.push_back(cmat2_from_json(m));
  if (s.coherency.empty()) throw ValidationError("source coherency list is empty");
  return s;
}

FrequencyBand band_from_json(const json& j) {
  FrequencyBand b;
  b.omega0 = j.at("omega0").get<double>();
  b.bandwidth = j.at("bandwidth").get<double>();
  b.samples = j.at("samples").get<int>();
  b.wave_speed = j.at("wave_speed").get<double>();
  return b;
}

ImagingWindow window_from_json(const json& j) {
  ImagingWindow w;
  w.center = vec3_from_json(j.at("center"));
  w.cross = j.at("cross").get<double>();
  w.range = j.at("range").get<double>();
  w.n_cross = j.at("n_cross").get<int>();
  w.n_range = j.at("n_range").get<int>();
  return w;
}

}  // namespace polarmig
