#include "polarmig/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "polarmig/glyphs.hpp"

namespace polarmig {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + p.string() + "' for writing");
  out << s;
}

}  // namespace

ArrayDataSet simulate_data(const ExperimentConfig& cfg) {
  if (cfg.stochastic) {
    SourceProcessSpec spec = cfg.process;
    spec.seed = cfg.seed;
    return stochastic_coherency(cfg.scene, spec, cfg.band.omega0 - cfg.band.bandwidth / 2,
                                cfg.band.omega0 + cfg.band.bandwidth / 2, 0, cfg.smooth, cfg.wave_speed);
  }
  if (cfg.use_full_response) return response_dataset(cfg.scene, cfg.band, false, cfg.second_born);
  return coherency_synthesize(cfg.scene, cfg.band, cfg.second_born);
}

ArrayDataSet imaging_data(const ArrayDataSet& ds, PreprocessReport* rep) {
  if (ds.kind() == DataKind::coherency2x2) return preprocess(ds, rep);
  return ds;
}

std::string scene_report(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "experiment " << cfg.name << "\n";
  os << "lambda0 " << fmt(cfg.lambda0) << "\n";
  os << "receivers " << cfg.scene.array.n1 << "x" << cfg.scene.array.n2 << " side " << fmt(cfg.scene.array.side) << "\n";
  os << "frequencies " << cfg.band.samples << "\n";
  os << "scatterers " << cfg.scene.scatterers.size() << "\n";
  os << "\n[regime]\n" << regime_report(cfg).text();
  const RegionReport reg = region_check(cfg.scene.array, cfg.scene.window, cfg.scene.source.position, cfg.gamma);
  os << "\n[region]\n"
     << "gamma " << reg.gamma << "\nslope " << fmt(reg.slope) << "\nmargin " << fmt(reg.margin) << "\n"
     << (reg.admissible ? "source admissible" : "source inside the excluded region") << "\n";
  return os.str();
}

std::vector<std::pair<std::string, ImageGrid>> config_slices(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, ImageGrid>> out;
  for (std::size_t i = 0; i < cfg.cross_slices_x3.size(); ++i)
    out.emplace_back("crossrange_" + std::to_string(i), ImageGrid::cross_range_slice(cfg.scene.window, cfg.cross_slices_x3[i]));
  for (std::size_t i = 0; i < cfg.range_slices_x2.size(); ++i)
    out.emplace_back("range_" + std::to_string(i), ImageGrid::range_slice(cfg.scene.window, cfg.range_slices_x2[i]));
  return out;
}

std::string recovered_table(const ExperimentConfig& cfg, const ArrayDataSet& imaging) {
  std::ostringstream os;
  os << "index,x1,x2,x3,alpha_norm,true_norm,re11,im11,re12,im12,re21,im21,re22,im22\n";
  const auto& sc = cfg.scene.scatterers;
  if (sc.empty() || sc.size() > 64) return os.str();
  std::vector<Vec3d> pts;
  for (const auto& s : sc) pts.push_back(s.position);
  MigrateOptions opt;
  opt.mode = cfg.mode;
  const ImageField f = migrate_points(imaging, pts, opt);
  const auto corrected = phase_correct(f.alpha, cfg.delta_rel);
  const Basis32d Us = cfg.scene.source.basis();
  for (std::size_t n = 0; n < sc.size(); ++n) {
    const CMat2d truth = compress<double>(array_basis<double>(), sc[n].alpha, Us);
    os << n << ',' << fmt(pts[n].x()) << ',' << fmt(pts[n].y()) << ',' << fmt(pts[n].z()) << ',' << fmt(corrected[n].norm())
       << ',' << fmt(truth.norm());
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) os << ',' << fmt(corrected[n](i, j).real()) << ',' << fmt(corrected[n](i, j).imag());
    os << '\n';
  }
  return os.str();
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  PipelineResult res;
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  res.directory = dir.string();
  auto add = [&](const std::string& name) { res.files.push_back(name); return (dir / name).string(); };

  write_text(add("config.json"), cfg.source_json.dump(2) + "\n");
  std::string report = scene_report(cfg);

  const ArrayDataSet data = simulate_data(cfg);
  if (cfg.write_datasets) dataset_write(add("data.pmg"), data);
  PreprocessReport prep;
  const ArrayDataSet img_data = imaging_data(data, &prep);
  if (data.kind() == DataKind::coherency2x2) {
    report += "\n[preprocess]\n" + prep.summary();
    if (cfg.write_datasets) dataset_write(add("preprocessed.pmg"), img_data);
  }

  MigrateOptions opt;
  opt.mode = cfg.mode;
  for (const auto& [name, grid] : config_slices(cfg)) {
    ImageField f = migrate(img_data, grid, opt);
    f.alpha = phase_correct(f.alpha, cfg.delta_rel);
    f.refresh_norms();
    for (double v : f.raw_norm) res.peak_image_norm = std::max(res.peak_image_norm, v);
    image_write(add(name + "_raw.pmg"), f, false);
    image_write(add(name + "_alpha.pmg"), f, true);
    image_write_csv(add(name + ".csv"), f);
    double peak = 0;
    for (double v : f.alpha_norm) peak = std::max(peak, v);
    if (!cfg.scene.scatterers.empty() && peak > 0) {
      const GlyphSet g = emit_glyphs(f, cfg.glyph_threshold);
      write_glyph_svg(add(name + "_glyphs_re.svg"), g.real, name + " real part");
      write_glyph_svg(add(name + "_glyphs_im.svg"), g.imag, name + " imaginary part");
      write_glyph_csv(add(name + "_glyphs.csv"), g);
    }
  }
  write_text(add("recovered.csv"), recovered_table(cfg, img_data));

  if (cfg.run_ergodicity) {
    SourceProcessSpec spec = cfg.process;
    spec.seed = cfg.seed;
    const ErgodicityResult e = ergodicity_probe(cfg.scene, spec, cfg.ergodicity);
    write_text(add("ergodicity.csv"), e.csv());
    report += "\n[ergodicity]\nslope " + fmt(e.slope) + "\n";
  }
  write_text(add("report.txt"), report);
  res.report = report;
  return res;
}

}  // namespace polarmig
