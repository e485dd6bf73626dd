#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "tpsh/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string k_values;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int repeats = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "configuration file");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--threads", flags.threads, "worker threads");
  cmd->add_option("--seed", flags.seed, "master seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  cmd->add_option("--k-values", flags.k_values, "comma-separated K values");
  cmd->add_option("--repeats", flags.repeats, "repeats per K");
}

tpsh::ExperimentConfig make_config(tpsh::Command command,
                                   const CommonFlags& flags) {
  tpsh::ExperimentConfig config = tpsh::ExperimentConfig::defaults(command);
  if (!flags.config_path.empty()) config.apply_file(flags.config_path);
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  if (flags.threads > 0) config.threads = flags.threads;
  if (flags.seed_set) config.master_seed = flags.seed;
  if (flags.repeats > 0) config.repeats = flags.repeats;
  if (!flags.k_values.empty())
    config.apply_ini_text("[state]\nk_values = " + flags.k_values + "\n");
  config.validate();
  return config;
}

void print_sweep(const tpsh::SweepResult& result) {
  std::printf("k_1d      mean %-12s std          normalized\n",
              result.value_name.c_str());
  for (const auto& a : result.aggregates)
    std::printf("%-9g %-17.6g %-12.6g %.6g\n", a.k1d, a.mean, a.stddev,
                a.mean_normalized);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tpsh: two-photon wavefront-shaping simulator\n"
      "Speckle, transmission-matrix correction and pair-correlation\n"
      "diagnostics for double-Gaussian SPDC states behind a thin phase\n"
      "scatterer."};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string tm_path = "out/tm.tpm";

  CLI::App* sweep_contrast = app.add_subcommand(
      "sweep-contrast", "speckle contrast vs Schmidt number");
  add_common(sweep_contrast, flags);
  CLI::App* sweep_enh = app.add_subcommand(
      "sweep-enhancement", "focusing enhancement vs Schmidt number");
  add_common(sweep_enh, flags);
  CLI::App* demo = app.add_subcommand(
      "demo-correction", "full correction story on one seed");
  add_common(demo, flags);
  CLI::App* tm = app.add_subcommand("tm", "measure and persist the TM");
  add_common(tm, flags);
  tm->add_option("--save", tm_path, "output matrix path");
  CLI::App* frames = app.add_subcommand(
      "g2-frames", "synthetic frame stack and G2 estimator");
  add_common(frames, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep_contrast->parsed()) {
      const auto config = make_config(tpsh::Command::sweep_contrast, flags);
      const auto result = tpsh::run_sweep_contrast(config);
      tpsh::write_sweep_csv(result, config.out_dir, "contrast");
      print_sweep(result);
      std::printf("rows written to %s/contrast_rows.csv\n",
                  config.out_dir.c_str());
    } else if (sweep_enh->parsed()) {
      const auto config = make_config(tpsh::Command::sweep_enhancement, flags);
      const auto result = tpsh::run_sweep_enhancement(config);
      tpsh::write_sweep_csv(result, config.out_dir, "enhancement");
      print_sweep(result);
      std::printf("rows written to %s/enhancement_rows.csv\n",
                  config.out_dir.c_str());
    } else if (demo->parsed()) {
      const auto config = make_config(tpsh::Command::demo_correction, flags);
      const auto summary = tpsh::run_demo_correction(config);
      std::printf("target pixel        %d\n", summary.target);
      std::printf("coherent eta        %.3f\n", summary.eta_corrected);
      std::printf("peak metric flat    %.3f\n", summary.metric_flat);
      std::printf("peak metric corr    %.3f\n", summary.metric_corrected);
      std::printf("pi-shift center/pk  %.4f\n", summary.pi_center_over_peak);
      std::printf("bundle written to %s (%zu files)\n", config.out_dir.c_str(),
                  summary.files.size());
    } else if (tm->parsed()) {
      const auto config = make_config(tpsh::Command::tm, flags);
      const auto matrix = tpsh::run_tm_command(config, tm_path);
      std::printf("measured TM %ld x %ld (%s basis), saved to %s\n",
                  static_cast<long>(matrix.entries.rows()),
                  static_cast<long>(matrix.entries.cols()),
                  matrix.basis == tpsh::TmBasis::pixel ? "pixel" : "hadamard",
                  tm_path.c_str());
    } else if (frames->parsed()) {
      const auto config = make_config(tpsh::Command::g2_frames, flags);
      const auto summary = tpsh::run_g2_frames(config);
      std::printf("frames              %d\n", summary.n_frames);
      std::printf("projection corr     %.4f\n", summary.projection_correlation);
      std::printf("bundle written to %s\n", config.out_dir.c_str());
    }
  } catch (const tpsh::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const tpsh::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const tpsh::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return 4;
  } catch (const tpsh::Error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
