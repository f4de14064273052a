#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "polarmig/glyphs.hpp"
#include "polarmig/parallel.hpp"
#include "polarmig/pipeline.hpp"

using namespace polarmig;
namespace fs = std::filesystem;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << text;
}

int run(int argc, char** argv) {
  CLI::App app{"Polarization data imaging with electromagnetic Kirchhoff migration"};
  app.require_subcommand(1);
  int nthreads = -1;
  app.add_option("--threads", nthreads, "Thread count (overrides POLARMIG_THREADS)");

  std::string config, in, out, out_dir, ergo_csv;
  bool response = false;
  double threshold = 0.5;
  std::uint64_t stream = 0;

  auto* sim = app.add_subcommand("simulate", "Synthesize a coherency (or response) dataset");
  sim->add_option("-c,--config", config, "Experiment config")->required();
  sim->add_option("-o,--out", out, "Dataset file")->required();
  sim->add_flag("--response", response, "Write the full array response instead of coherency data");

  auto* pre = app.add_subcommand("preprocess", "Map coherency data to approximate response data");
  pre->add_option("-i,--in", in, "Coherency dataset")->required();
  pre->add_option("-o,--out", out, "Preprocessed dataset")->required();

  auto* img = app.add_subcommand("image", "Kirchhoff images on the configured slices");
  img->add_option("-i,--in", in, "Response or preprocessed dataset")->required();
  img->add_option("-c,--config", config, "Experiment config")->required();
  img->add_option("-o,--out-dir", out_dir, "Output directory")->required();

  auto* rec = app.add_subcommand("recover", "Recovered tensors at the scatterer positions");
  rec->add_option("-i,--in", in, "Response or preprocessed dataset")->required();
  rec->add_option("-c,--config", config, "Experiment config")->required();
  rec->add_option("-o,--out", out, "CSV table")->required();

  auto* sto = app.add_subcommand("stochastic", "Stochastic acquisition and ergodicity probe");
  sto->add_option("-c,--config", config, "Experiment config")->required();
  sto->add_option("-o,--out", out, "Coherency dataset estimated from one realization");
  sto->add_option("--stream", stream, "Realization index");
  sto->add_option("--ergodicity", ergo_csv, "Write the variance-vs-T table here");

  auto* rep = app.add_subcommand("report", "Regime and source-region report");
  rep->add_option("-c,--config", config, "Experiment config")->required();

  auto* gly = app.add_subcommand("glyphs", "Tensor ellipse glyphs from a recovered tensor image");
  gly->add_option("-i,--in", in, "image2x2 file")->required();
  gly->add_option("-t,--threshold", threshold, "Fraction of the peak norm")->check(CLI::Range(0.0, 1.0));
  gly->add_option("-o,--out", out, "Output prefix")->required();

  auto* all = app.add_subcommand("run", "Full pipeline into an artifact directory");
  all->add_option("-c,--config", config, "Experiment config")->required();
  all->add_option("-o,--out-dir", out_dir, "Overrides the config output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  threads_from_env();
  if (nthreads >= 0) set_threads(nthreads);

  if (*sim) {
    ExperimentConfig cfg = load_config(config);
    cfg.use_full_response = cfg.use_full_response || response;
    dataset_write(out, simulate_data(cfg));
  } else if (*pre) {
    PreprocessReport r;
    dataset_write(out, preprocess(dataset_read(in), &r));
    std::cout << r.summary();
  } else if (*img) {
    const ExperimentConfig cfg = load_config(config);
    const ArrayDataSet ds = imaging_data(dataset_read(in));
    fs::create_directories(out_dir);
    MigrateOptions opt;
    opt.mode = cfg.mode;
    for (const auto& [name, grid] : config_slices(cfg)) {
      ImageField f = migrate(ds, grid, opt);
      f.alpha = phase_correct(f.alpha, cfg.delta_rel);
      f.refresh_norms();
      image_write((fs::path(out_dir) / (name + "_raw.pmg")).string(), f, false);
      image_write((fs::path(out_dir) / (name + "_alpha.pmg")).string(), f, true);
      image_write_csv((fs::path(out_dir) / (name + ".csv")).string(), f);
      std::cout << name << " peak " << f.raw_norm[f.peak(false)] << "\n";
    }
  } else if (*rec) {
    const ExperimentConfig cfg = load_config(config);
    write_file(out, recovered_table(cfg, imaging_data(dataset_read(in))));
  } else if (*sto) {
    ExperimentConfig cfg = load_config(config);
    SourceProcessSpec spec = cfg.process;
    spec.seed = cfg.seed;
    if (!out.empty()) {
      dataset_write(out, stochastic_coherency(cfg.scene, spec, cfg.band.omega0 - cfg.band.bandwidth / 2,
                                              cfg.band.omega0 + cfg.band.bandwidth / 2, stream, cfg.smooth, cfg.wave_speed));
    }
    if (!ergo_csv.empty()) {
      if (!cfg.run_ergodicity) throw ValidationError("config has no stochastic.ergodicity section");
      const ErgodicityResult e = ergodicity_probe(cfg.scene, spec, cfg.ergodicity);
      write_file(ergo_csv, e.csv());
      std::cout << "slope " << e.slope << "\n";
    }
    if (out.empty() && ergo_csv.empty()) throw ValidationError("stochastic needs --out or --ergodicity");
  } else if (*rep) {
    std::cout << scene_report(load_config(config));
  } else if (*gly) {
    const ImageField f = image_read(in);
    const GlyphSet g = emit_glyphs(f, threshold);
    write_glyph_svg(out + "_re.svg", g.real, "real part");
    write_glyph_svg(out + "_im.svg", g.imag, "imaginary part");
    write_glyph_csv(out + ".csv", g);
  } else if (*all) {
    ExperimentConfig cfg = load_config(config);
    if (!out_dir.empty()) cfg.output = out_dir;
    const PipelineResult r = run_pipeline(cfg);
    std::cout << r.report;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
