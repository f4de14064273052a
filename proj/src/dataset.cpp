#include "polarmig/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "polarmig/parallel.hpp"
#include "polarmig/serialize.hpp"

namespace polarmig {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "payload layout assumes a little-endian host");

std::string to_string(DataKind k) {
  switch (k) {
    case DataKind::coherency2x2: return "coherency2x2";
    case DataKind::response3x3: return "response3x3";
    case DataKind::preprocessed3x3: return "preprocessed3x3";
  }
  return "unknown";
}

DataKind data_kind_from_string(const std::string& s) {
  if (s == "coherency2x2") return DataKind::coherency2x2;
  if (s == "response3x3") return DataKind::response3x3;
  if (s == "preprocessed3x3") return DataKind::preprocessed3x3;
  throw FormatError("unknown dataset kind '" + s + "'");
}

ArrayDataSet::ArrayDataSet(DataKind kind, const ArrayGeom& array, const SourceSpec& source, const FrequencyBand& band)
    : kind_(kind), array_(array), source_(source), band_(band) {
  if (source.coherency.size() != 1 && int(source.coherency.size()) != band.samples)
    throw ValidationError("source coherency must be constant or tabulated per frequency");
  values_.assign(array.count() * std::size_t(band.samples) * std::size_t(dim() * dim()), cd(0));
}

ArrayDataSet coherency_synthesize(const Scene& scene, const FrequencyBand& band, bool include_second_born) {
  scene.validate();
  band.validate();
  ArrayDataSet ds(DataKind::coherency2x2, scene.array, scene.source, band);
  for (int f = 0; f < band.samples; ++f) {
    const Wavenumberd k(band.wavenumber(f));
    const MatField2 P = coherency_at(scene, k, scene.source.coherency_at(f), include_second_born);
    for (std::size_t r = 0; r < P.size(); ++r) ds.set(r, f, P[r]);
  }
  return ds;
}

ArrayDataSet response_dataset(const Scene& scene, const FrequencyBand& band, bool projected, bool include_second_born) {
  scene.validate();
  band.validate();
  ArrayDataSet ds(DataKind::response3x3, scene.array, scene.source, band);
  const Basis32d Us = scene.source.basis();
  const Mat3d Ps = Us * Us.transpose();
  const Mat3d Pp = array_basis<double>() * array_basis<double>().transpose();
  for (int f = 0; f < band.samples; ++f) {
    const Wavenumberd k(band.wavenumber(f));
    MatField3 Pi = born_response(scene, k);
    if (include_second_born) {
      const MatField3 Pi2 = second_born_response(scene, k);
      for (std::size_t r = 0; r < Pi.size(); ++r) Pi[r] += Pi2[r];
    }
    for (std::size_t r = 0; r < Pi.size(); ++r)
      ds.set(r, f, projected ? CMat3d(Pp.cast<cd>() * Pi[r] * Ps.cast<cd>()) : Pi[r]);
  }
  return ds;
}

void container_write(const std::string& path, const std::string& header, const std::vector<double>& payload) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out.write(kMagic, kMagicLen);
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header.data(), std::streamsize(header.size()));
  out.write(reinterpret_cast<const char*>(payload.data()), std::streamsize(payload.size() * sizeof(double)));
  if (!out) throw FormatError("write failed for '" + path + "'");
}

Container container_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (std::size_t i = 0; i < kMagicLen; ++i) {
    if (i >= bytes.size() || bytes[i] != kMagic[i])
      throw FormatError("bad magic at byte offset " + std::to_string(i) + " in '" + path + "'");
  }
  std::size_t pos = kMagicLen;
  if (bytes.size() < pos + 8) throw FormatError("truncated header length at byte offset " + std::to_string(pos));
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + pos, 8);
  pos += 8;
  if (len > bytes.size() - pos) throw FormatError("truncated header at byte offset " + std::to_string(pos));
  Container c;
  c.header.assign(bytes.data() + pos, len);
  pos += len;

  json h;
  try {
    h = json::parse(c.header);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  }
  if (!h.contains("payload_doubles")) throw FormatError("header lacks payload_doubles");
  const std::uint64_t n = h.at("payload_doubles").get<std::uint64_t>();
  const std::size_t avail = bytes.size() - pos;
  if (avail != n * sizeof(double))
    throw FormatError("payload size mismatch: header declares " + std::to_string(n * sizeof(double)) + " bytes, file has " +
                      std::to_string(avail));
  c.payload.resize(n);
  std::memcpy(c.payload.data(), bytes.data() + pos, avail);
  return c;
}

void dataset_write(const std::string& path, const ArrayDataSet& ds) {
  json h;
  h["kind"] = to_string(ds.kind());
  h["array"] = to_json(ds.array());
  h["source"] = to_json(ds.source());
  h["band"] = to_json(ds.band());
  h["dims"] = {ds.array().n1, ds.array().n2, ds.frequencies(), ds.dim(), ds.dim()};
  h["payload_doubles"] = ds.values().size() * 2;
  std::vector<double> payload(ds.values().size() * 2);
  std::memcpy(payload.data(), ds.values().data(), payload.size() * sizeof(double));
  container_write(path, h.dump(), payload);
}

ArrayDataSet dataset_read(const std::string& path) {
  Container c = container_read(path);
  const json h = json::parse(c.header);
  try {
    const DataKind kind = data_kind_from_string(h.at("kind").get<std::string>());
    ArrayDataSet ds(kind, array_from_json(h.at("array")), source_from_json(h.at("source")), band_from_json(h.at("band")));
    const auto dims = h.at("dims").get<std::vector<long>>();
    if (dims.size() != 5 || dims[0] != ds.array().n1 || dims[1] != ds.array().n2 || dims[2] != ds.frequencies() ||
        dims[3] != ds.dim() || dims[4] != ds.dim())
      throw FormatError("dimension mismatch between header dims and geometry");
    if (c.payload.size() != ds.values().size() * 2)
      throw FormatError("dimension mismatch: payload holds " + std::to_string(c.payload.size()) + " doubles, geometry needs " +
                        std::to_string(ds.values().size() * 2));
    std::memcpy(static_cast<void*>(ds.values().data()), c.payload.data(), c.payload.size() * sizeof(double));
    return ds;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(std::string("inconsistent header: ") + e.what());
  }
}

}  // namespace polarmig
