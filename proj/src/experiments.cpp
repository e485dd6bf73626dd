#include "tpsh/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "tpsh/errors.hpp"
#include "tpsh/rng.hpp"

namespace tpsh {

namespace {

namespace fs = std::filesystem;

// Seed stream tags (arbitrary fixed constants, documented in README).
constexpr std::uint64_t kStreamScreen = 0x5343524eULL;    // sweep screens
constexpr std::uint64_t kStreamEnvelope = 0x454e5645ULL;  // envelope seeds
constexpr std::uint64_t kStreamOptimize = 0x4f505449ULL;  // optimizer
constexpr std::uint64_t kStreamFrames = 0x46524d53ULL;    // frame stacks

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for " + key + ": " + v);
  }
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long d = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(d);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for " + key + ": " + v);
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& key) {
  try {
    std::size_t pos = 0;
    const unsigned long long d = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad seed value for " + key + ": " + v);
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean value for " + key + ": " + v);
}

std::vector<double> parse_double_list(const std::string& v,
                                      const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, key));
  }
  if (out.empty()) throw ConfigError("config: empty list for " + key);
  return out;
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

PhaseScreen zero_screen(const Grid1D& grid) {
  return PhaseScreen{grid, RVec::Zero(grid.n()), grid.extent(), 0};
}

void parallel_points(int n_tasks, int threads,
                     const std::function<void(int)>& body) {
  if (threads <= 1 || n_tasks <= 1) {
    for (int i = 0; i < n_tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int n_threads = std::min(threads, n_tasks);
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

nlohmann::json range_json(const PixelRange& r) {
  return nlohmann::json{{"first", r.first}, {"last", r.last}};
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults(Command command) {
  ExperimentConfig c;  // struct initializers carry the Fig.-4-style sweep
  switch (command) {
    case Command::sweep_contrast:
      break;
    case Command::sweep_enhancement:
      // The optimization story needs the aperture to span many coherence
      // cells at high K: fixed wide beam, pair coherence shrinking with K
      // (the Fourier-conjugate parameterization of the same family).
      c.k_branch = KBranch::narrow_sum;
      c.diff_width = 200 * (10e-3 / 1500);   // 1.333 mm beam-scale width
      c.correlation_length = 2 * (10e-3 / 1500);
      c.pixels_per_segment = 6;
      break;
    case Command::tm:
    case Command::demo_correction:
      // Anticorrelated pairs at the SLM plane: a fixed wide beam whose
      // camera-plane pair peak sits in the minus coordinate. The segment
      // count is odd so that the mirror of every modulated segment is
      // itself modulated (pairs land on antipodal pixels; with an even
      // count the alternating reference split would leave one photon of
      // every pair uncorrected).
      c.n_points = 512;
      c.extent = 2.56e-3;
      c.diff_width = 0.9e-3;
      c.k_branch = KBranch::narrow_sum;
      c.correlation_length = 15e-6;
      c.n_segments = 129;
      c.pixels_per_segment = 2;
      c.k_values = {16};
      break;
    case Command::g2_frames:
      c.n_points = 64;
      c.extent = 0.64e-3;
      c.diff_width = 40e-6;
      c.k_branch = KBranch::wide_sum;
      c.k_values = {4};
      c.demo_k1d = 4.0;
      c.n_segments = 8;
      c.pixels_per_segment = 8;
      c.n_frames = 200000;
      break;
  }
  return c;
}

void ExperimentConfig::apply_ini_text(const std::string& text) {
  std::istringstream is(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config: malformed section at line " +
                          std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " +
                        std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "grid.n_points") n_points = parse_int(value, qual);
    else if (qual == "grid.extent") extent = parse_double(value, qual);
    else if (qual == "state.diff_width") diff_width = parse_double(value, qual);
    else if (qual == "state.width_convention") {
      if (value == "sigma") width_is_fwhm = false;
      else if (value == "fwhm") width_is_fwhm = true;
      else throw ConfigError("config: width_convention must be sigma|fwhm");
    } else if (qual == "state.k_branch") {
      if (value == "wide-sum") k_branch = KBranch::wide_sum;
      else if (value == "narrow-sum") k_branch = KBranch::narrow_sum;
      else throw ConfigError("config: k_branch must be wide-sum|narrow-sum");
    } else if (qual == "state.k_values") k_values = parse_double_list(value, qual);
    else if (qual == "state.k_convention") {
      if (value == "1d") k_is_2d = false;
      else if (value == "2d") k_is_2d = true;
      else throw ConfigError("config: k_convention must be 1d|2d");
    } else if (qual == "state.probe_k1d") probe_k1d = parse_double(value, qual);
    else if (qual == "state.demo_k1d") demo_k1d = parse_double(value, qual);
    else if (qual == "scatterer.correlation_length")
      correlation_length = parse_double(value, qual);
    else if (qual == "slm.n_segments") n_segments = parse_int(value, qual);
    else if (qual == "slm.pixels_per_segment")
      pixels_per_segment = parse_int(value, qual);
    else if (qual == "slm.aperture_start") {
      if (value == "centered") aperture_start = -1;
      else aperture_start = parse_int(value, qual);
    } else if (qual == "slm.basis") {
      if (value == "pixel") basis = TmBasis::pixel;
      else if (value == "hadamard") basis = TmBasis::hadamard;
      else throw ConfigError("config: basis must be pixel|hadamard");
    } else if (qual == "slm.phase_steps") phase_steps = parse_int(value, qual);
    else if (qual == "optimization.iterations")
      iterations = parse_int(value, qual);
    else if (qual == "optimization.trial_phases")
      trial_phases = parse_int(value, qual);
    else if (qual == "optimization.target") {
      if (value == "auto") target = -1;
      else target = parse_int(value, qual);
    } else if (qual == "detector.mu_pair")
      detector.mu_pair = parse_double(value, qual);
    else if (qual == "detector.p_dark")
      detector.p_dark = parse_double(value, qual);
    else if (qual == "detector.threshold")
      detector.threshold = parse_bool(value, qual);
    else if (qual == "detector.n_frames") n_frames = parse_int(value, qual);
    else if (qual == "sweep.repeats") repeats = parse_int(value, qual);
    else if (qual == "sweep.envelope_seeds")
      envelope_seeds = parse_int(value, qual);
    else if (qual == "demo.peak_halfwidth")
      peak_halfwidth = parse_int(value, qual);
    else if (qual == "run.seed") master_seed = parse_u64(value, qual);
    else if (qual == "run.threads") threads = parse_int(value, qual);
    else if (qual == "run.out_dir") out_dir = value;
    else throw ConfigError("config: unknown key '" + qual + "'");
  }
}

void ExperimentConfig::apply_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  apply_ini_text(buffer.str());
}

void ExperimentConfig::validate() const {
  if (n_points < 2) throw ConfigError("config: n_points must be >= 2");
  if (!(extent > 0)) throw ConfigError("config: extent must be > 0");
  if (!(diff_width > 0)) throw ConfigError("config: diff_width must be > 0");
  for (double k : k_values)
    if (!(k >= 1.0)) throw ConfigError("config: k values must be >= 1");
  if (!(probe_k1d >= 1.0)) throw ConfigError("config: probe_k1d must be >= 1");
  if (!(demo_k1d >= 1.0)) throw ConfigError("config: demo_k1d must be >= 1");
  if (!(correlation_length >= extent / n_points))
    throw ConfigError("config: correlation_length below pixel pitch");
  if (n_segments < 1 || pixels_per_segment < 1)
    throw ConfigError("config: bad SLM segmentation");
  if (n_segments * pixels_per_segment > n_points)
    throw ConfigError("config: SLM aperture wider than grid");
  if (phase_steps < 3) throw ConfigError("config: phase_steps must be >= 3");
  if (iterations < 1) throw ConfigError("config: iterations must be >= 1");
  if (trial_phases < 3) throw ConfigError("config: trial_phases must be >= 3");
  if (target >= n_points) throw ConfigError("config: target out of grid");
  detector.validate();
  if (n_frames < 2) throw ConfigError("config: n_frames must be >= 2");
  if (repeats < 1) throw ConfigError("config: repeats must be >= 1");
  if (envelope_seeds < 1)
    throw ConfigError("config: envelope_seeds must be >= 1");
  if (peak_halfwidth < 0 || peak_halfwidth >= n_points / 4)
    throw ConfigError("config: peak_halfwidth must be in [0, n/4)");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
}

double ExperimentConfig::effective_diff_width() const {
  // FWHM convention refers to the intensity profile of the difference
  // coordinate, |psi|^2 ~ exp(-d^2 / (2 B^2)): FWHM = 2 B sqrt(2 ln 2).
  if (!width_is_fwhm) return diff_width;
  return diff_width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

GaussianStateParams ExperimentConfig::params_for_k(double k_value) const {
  const double k1d = k_is_2d ? std::sqrt(k_value) : k_value;
  return GaussianStateParams::from_schmidt_1d(
      k1d, effective_diff_width(), k_branch == KBranch::wide_sum);
}

SlmMask ExperimentConfig::segmentation() const {
  if (aperture_start < 0)
    return SlmMask::flat_centered(grid(), n_segments, pixels_per_segment);
  return SlmMask::flat(n_segments, aperture_start, pixels_per_segment);
}

CVec coherent_probe_field(const ExperimentConfig& config) {
  // Single Schmidt mode of the balanced (K = 1) state of the same family:
  // a Gaussian with 1/e amplitude half-width sqrt(2) B... the balanced state
  // factorizes as f(x1) f(x2) with f ~ exp(-x^2 / (2 B^2)).
  const Grid1D g = config.grid();
  const double b = config.effective_diff_width();
  CVec f(g.n());
  for (int k = 0; k < g.n(); ++k) {
    const double x = g.coord(k);
    f(k) = std::exp(-x * x / (2.0 * b * b));
  }
  f /= f.norm() * std::sqrt(g.dx());  // sum |f|^2 dx = 1
  return f;
}

PixelRange canonical_region(const ExperimentConfig& config,
                            const CVec& probe_field) {
  const IntensityProfile env = mean_envelope(
      config.grid(), probe_field, config.correlation_length,
      derive_seed(config.master_seed, kStreamEnvelope, 0),
      config.envelope_seeds);
  return central_region(env);
}

int pick_typical_target(const IntensityProfile& envelope,
                        const PixelRange& region) {
  if (region.size() <= 0) throw EmptyRegion("pick_typical_target");
  const double mean =
      envelope.values.segment(region.first, region.size()).mean();
  int best = region.first;
  double best_diff = std::abs(envelope.values(region.first) - mean);
  for (int i = region.first; i < region.last; ++i) {
    const double d = std::abs(envelope.values(i) - mean);
    if (d < best_diff) {
      best_diff = d;
      best = i;
    }
  }
  return best;
}

namespace {

struct SweepSetup {
  Grid1D grid;
  CVec coherent_field;
  IntensityProfile envelope;
  PixelRange region;
  int target;
  std::vector<SchmidtDecomposition> decompositions;  // one per K value
};

SweepSetup prepare_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepSetup s{config.grid(), coherent_probe_field(config),
               IntensityProfile{config.grid(), RVec()},
               PixelRange{},
               0,
               {}};
  s.envelope = mean_envelope(s.grid, s.coherent_field,
                             config.correlation_length,
                             derive_seed(config.master_seed, kStreamEnvelope, 0),
                             config.envelope_seeds);
  s.region = central_region(s.envelope);
  s.target =
      config.target >= 0 ? config.target : pick_typical_target(s.envelope, s.region);

  s.decompositions.reserve(config.k_values.size());
  for (double k : config.k_values) {
    const TwoPhotonState state =
        build_state(config.params_for_k(k), s.grid, SamplingPolicy::clip);
    s.decompositions.push_back(schmidt_decompose(state));
  }
  return s;
}

void finalize_sweep(SweepResult& result, const ExperimentConfig& config) {
  // Aggregates per K in sweep order; normalization is per-curve by the
  // maximum mean.
  const int reps = config.repeats;
  const int nk = static_cast<int>(config.k_values.size());
  result.aggregates.clear();
  double max_mean = 0.0;
  for (int ki = 0; ki < nk; ++ki) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += result.rows[ki * reps + r].value;
    mean /= reps;
    max_mean = std::max(max_mean, mean);
  }
  if (!(max_mean > 0.0)) throw ZeroMean("sweep: all values vanish");
  for (int ki = 0; ki < nk; ++ki) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += result.rows[ki * reps + r].value;
    mean /= reps;
    double var = 0.0;
    for (int r = 0; r < reps; ++r) {
      const double d = result.rows[ki * reps + r].value - mean;
      var += d * d;
    }
    const double stddev = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
    for (int r = 0; r < reps; ++r)
      result.rows[ki * reps + r].normalized =
          result.rows[ki * reps + r].value / max_mean;
    result.aggregates.push_back(SweepAggregate{
        result.rows[ki * reps].k1d, mean, stddev, mean / max_mean});
  }
}

}  // namespace

SweepResult run_sweep_contrast(const ExperimentConfig& config) {
  SweepSetup setup = prepare_sweep(config);
  const int reps = config.repeats;
  const int nk = static_cast<int>(config.k_values.size());

  SweepResult result;
  result.value_name = "contrast";
  result.rows.resize(static_cast<std::size_t>(nk) * reps);

  parallel_points(nk * reps, config.threads, [&](int idx) {
    const int ki = idx / reps;
    const int rep = idx % reps;
    // Screens are paired across K: the seed depends on the repeat only.
    const std::uint64_t seed =
        derive_seed(config.master_seed, kStreamScreen, rep);
    const PhaseScreen screen =
        random_phase_screen(setup.grid, config.correlation_length, seed);
    const SlmMask flat = SlmMask::flat_centered(setup.grid, 1, setup.grid.n());
    const SystemOperator sys(setup.grid, screen, flat);
    const IntensityProfile profile =
        reduced_intensity(setup.decompositions[ki], sys);
    const double contrast = speckle_contrast(profile, setup.region);
    const double k1d = config.k_is_2d ? std::sqrt(config.k_values[ki])
                                      : config.k_values[ki];
    result.rows[idx] = SweepRow{
        k1d, seed, contrast, 0.0,
        static_cast<double>(setup.decompositions[ki].modes.size())};
  });

  finalize_sweep(result, config);
  return result;
}

SweepResult run_sweep_enhancement(const ExperimentConfig& config) {
  SweepSetup setup = prepare_sweep(config);
  const int reps = config.repeats;
  const int nk = static_cast<int>(config.k_values.size());
  const SlmMask segmentation = config.segmentation();

  SweepResult result;
  result.value_name = "enhancement";
  result.rows.resize(static_cast<std::size_t>(nk) * reps);

  parallel_points(nk * reps, config.threads, [&](int idx) {
    const int ki = idx / reps;
    const int rep = idx % reps;
    const std::uint64_t seed =
        derive_seed(config.master_seed, kStreamScreen, rep);
    const PhaseScreen screen =
        random_phase_screen(setup.grid, config.correlation_length, seed);

    // Feedback probe carries the K-state; the optimizer sees the reduced
    // intensity a camera would.
    const TwoPhotonIntensityProbe probe(setup.decompositions[ki], screen);
    const OptimizationTrace trace = sequential_optimize(
        probe, segmentation, setup.target, config.trial_phases,
        config.iterations, derive_seed(config.master_seed, kStreamOptimize, idx));

    // Benchmark with the coherent probe through the same scatterer.
    const SystemOperator masked(setup.grid, screen, trace.final_mask);
    const SystemOperator flat(
        setup.grid, screen,
        SlmMask::flat_centered(setup.grid, 1, setup.grid.n()));
    const double eta = enhancement_factor(masked, flat, setup.coherent_field,
                                          setup.target, setup.region);
    const double k1d = config.k_is_2d ? std::sqrt(config.k_values[ki])
                                      : config.k_values[ki];
    result.rows[idx] =
        SweepRow{k1d, seed, eta, 0.0,
                 trace.steps.empty() ? 0.0 : trace.steps.back().intensity};
  });

  finalize_sweep(result, config);
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::string& out_dir,
                     const std::string& prefix) {
  fs::create_directories(out_dir);
  {
    std::string text = "# tpsh-sweep-csv v1\n";
    text += "k_1d,seed," + result.value_name + "," + result.value_name +
            "_normalized,aux\n";
    for (const SweepRow& row : result.rows) {
      format_double(text, row.k1d);
      text += ",";
      text += std::to_string(row.seed);
      text += ",";
      format_double(text, row.value);
      text += ",";
      format_double(text, row.normalized);
      text += ",";
      format_double(text, row.aux);
      text += "\n";
    }
    std::ofstream os(out_dir + "/" + prefix + "_rows.csv", std::ios::binary);
    if (!os) throw IoError("write_sweep_csv: cannot open rows file");
    os << text;
  }
  {
    std::string text = "# tpsh-sweep-csv v1 aggregates\n";
    text += "k_1d,mean,std,mean_normalized\n";
    for (const SweepAggregate& a : result.aggregates) {
      format_double(text, a.k1d);
      text += ",";
      format_double(text, a.mean);
      text += ",";
      format_double(text, a.stddev);
      text += ",";
      format_double(text, a.mean_normalized);
      text += "\n";
    }
    std::ofstream os(out_dir + "/" + prefix + "_aggregates.csv",
                     std::ios::binary);
    if (!os) throw IoError("write_sweep_csv: cannot open aggregates file");
    os << text;
  }
}

namespace {

void write_projection_pair(const std::string& dir, const std::string& stem,
                           const G2Map& map, std::vector<std::string>& files) {
  const G2Projection minus = project(map, ProjectionAxis::minus);
  const G2Projection sum = project(map, ProjectionAxis::sum);
  save_projection_csv(dir + "/g2_minus_" + stem + ".csv", minus);
  save_projection_csv(dir + "/g2_sum_" + stem + ".csv", sum);
  files.push_back("g2_minus_" + stem + ".csv");
  files.push_back("g2_sum_" + stem + ".csv");
}

}  // namespace

DemoSummary run_demo_correction(const ExperimentConfig& config) {
  config.validate();
  const Grid1D grid = config.grid();
  const std::string dir = config.out_dir;
  fs::create_directories(dir);

  DemoSummary summary;

  // Channel under test, plus the scatter-free control.
  const PhaseScreen screen = random_phase_screen(
      grid, config.correlation_length,
      derive_seed(config.master_seed, kStreamScreen, 0));
  const PhaseScreen no_medium = zero_screen(grid);
  const SlmMask flat_full = SlmMask::flat_centered(grid, 1, grid.n());
  const SlmMask segmentation = config.segmentation();

  // Coherent-regime probe (low-K state of the same family).
  const CVec coherent = coherent_probe_field(config);
  const IntensityProfile envelope = mean_envelope(
      grid, coherent, config.correlation_length,
      derive_seed(config.master_seed, kStreamEnvelope, 0),
      config.envelope_seeds);
  summary.region = central_region(envelope);
  summary.target = config.target >= 0
                       ? config.target
                       : pick_typical_target(envelope, summary.region);

  const TwoPhotonState probe_state = build_state(
      config.params_for_k(config.probe_k1d), grid, SamplingPolicy::clip);
  const SchmidtDecomposition probe_decomp = schmidt_decompose(probe_state);
  const TwoPhotonIntensityProbe probe(probe_decomp, screen);

  // (1) coherent-regime intensities: no medium, speckle, corrected.
  const SystemOperator sys_no_medium(grid, no_medium, flat_full);
  const SystemOperator sys_flat(grid, screen, flat_full);
  save_profile_csv(dir + "/intensity_no_medium.csv",
                   reduced_intensity(probe_decomp, sys_no_medium));
  save_profile_csv(dir + "/intensity_flat.csv",
                   reduced_intensity(probe_decomp, sys_flat));

  // (2) transmission matrix in the coherent-like regime.
  TmOptions tm_options;
  tm_options.phase_steps = config.phase_steps;
  tm_options.basis = config.basis;
  const TransmissionMatrix tm = measure_tm(probe, segmentation, tm_options);

  // (3) focusing mask.
  const SlmMask correction = focus_mask(tm, summary.target);
  const SystemOperator sys_corrected(grid, screen, correction);
  save_profile_csv(dir + "/intensity_corrected.csv",
                   reduced_intensity(probe_decomp, sys_corrected));
  summary.eta_corrected = enhancement_factor(sys_corrected, sys_flat, coherent,
                                             summary.target, summary.region);

  // (4) four-spot shaping and the pi-shifted correction. The pi region is
  // one quarter of the aperture: for pairs anticorrelated across the
  // aperture center this flips the sign of half the pair amplitude, the 1D
  // counterpart of the top-left-quadrant flip.
  const int spot_step = std::max(2, summary.region.size() / 12);
  std::vector<int> spots = {summary.target - 3 * spot_step,
                            summary.target - spot_step,
                            summary.target + spot_step,
                            summary.target + 3 * spot_step};
  for (int& s : spots) s = std::clamp(s, 0, grid.n() - 1);
  const SlmMask four_spot = multi_target_mask(tm, spots);
  const SystemOperator sys_four(grid, screen, four_spot);
  save_profile_csv(dir + "/intensity_four_spot.csv",
                   reduced_intensity(probe_decomp, sys_four));

  const SlmMask correction_pi = quadrant_pi_shift(
      correction, config.n_segments / 2, 3 * config.n_segments / 4);
  const SystemOperator sys_pi(grid, screen, correction_pi);

  // (5) high-K state through flat vs corrected vs pi-shifted masks.
  const TwoPhotonState entangled = build_state(
      config.params_for_k(config.demo_k1d), grid, SamplingPolicy::clip);

  const auto projections_for = [&](const SystemOperator& sys) {
    const G2Map map = g2_exact(propagate_two_photon(entangled, sys));
    return map.restricted(summary.region);
  };

  const G2Map g2_no_medium = projections_for(sys_no_medium);
  const G2Map g2_flat = projections_for(sys_flat);
  const G2Map g2_corrected = projections_for(sys_corrected);
  const G2Map g2_pi = projections_for(sys_pi);

  summary.files = {"intensity_no_medium.csv", "intensity_flat.csv",
                   "intensity_corrected.csv", "intensity_four_spot.csv"};
  write_projection_pair(dir, "no_medium", g2_no_medium, summary.files);
  write_projection_pair(dir, "flat", g2_flat, summary.files);
  write_projection_pair(dir, "corrected", g2_corrected, summary.files);
  write_projection_pair(dir, "pi_shift", g2_pi, summary.files);

  const int hw = config.peak_halfwidth;
  summary.metric_no_medium =
      peak_metric(project(g2_no_medium, ProjectionAxis::minus), hw);
  summary.metric_flat = peak_metric(project(g2_flat, ProjectionAxis::minus), hw);
  summary.metric_corrected =
      peak_metric(project(g2_corrected, ProjectionAxis::minus), hw);
  summary.metric_corrected_pi =
      peak_metric(project(g2_pi, ProjectionAxis::minus), hw);

  {
    const G2Projection pi_minus = project(g2_pi, ProjectionAxis::minus);
    const G2Projection corr_minus = project(g2_corrected, ProjectionAxis::minus);
    summary.pi_center_over_peak = pi_minus.values(pi_minus.center_bin()) /
                                  corr_minus.values(corr_minus.center_bin());
  }

  nlohmann::json js;
  js["target"] = summary.target;
  js["region"] = range_json(summary.region);
  js["eta_corrected"] = summary.eta_corrected;
  js["peak_metric"] = {{"no_medium", summary.metric_no_medium},
                       {"flat", summary.metric_flat},
                       {"corrected", summary.metric_corrected},
                       {"corrected_pi", summary.metric_corrected_pi}};
  js["pi_center_over_peak"] = summary.pi_center_over_peak;
  js["peak_halfwidth"] = hw;
  js["seed"] = config.master_seed;
  summary.files.push_back("summary.json");
  js["files"] = summary.files;
  std::ofstream os(dir + "/summary.json", std::ios::binary);
  if (!os) throw IoError("demo: cannot write summary.json");
  os << js.dump(2) << "\n";

  return summary;
}

TransmissionMatrix run_tm_command(const ExperimentConfig& config,
                                  const std::string& path) {
  config.validate();
  const Grid1D grid = config.grid();
  const PhaseScreen screen = random_phase_screen(
      grid, config.correlation_length,
      derive_seed(config.master_seed, kStreamScreen, 0));
  const TwoPhotonState probe_state = build_state(
      config.params_for_k(config.probe_k1d), grid, SamplingPolicy::clip);
  const TwoPhotonIntensityProbe probe(schmidt_decompose(probe_state), screen);

  TmOptions options;
  options.phase_steps = config.phase_steps;
  options.basis = config.basis;
  TransmissionMatrix tm = measure_tm(probe, config.segmentation(), options);
  tm.seed = screen.seed;

  fs::create_directories(fs::path(path).parent_path().empty()
                             ? "."
                             : fs::path(path).parent_path().string());
  save_tm(path, tm);
  const TransmissionMatrix back = load_tm(path);
  if (back.entries.rows() != tm.entries.rows() ||
      back.entries.cols() != tm.entries.cols() ||
      (back.entries - tm.entries).cwiseAbs().maxCoeff() != 0.0)
    throw IoError("tm: save/load round trip mismatch");
  return tm;
}

G2FramesSummary run_g2_frames(const ExperimentConfig& config) {
  config.validate();
  const Grid1D grid = config.grid();
  const std::string dir = config.out_dir;
  fs::create_directories(dir);

  // Scatter-free channel: the camera sees the Fourier plane of the source.
  const SystemOperator sys(grid, zero_screen(grid),
                           SlmMask::flat_centered(grid, 1, grid.n()));
  const TwoPhotonState state = build_state(config.params_for_k(config.demo_k1d),
                                           grid, SamplingPolicy::clip);
  const G2Map exact = g2_exact(propagate_two_photon(state, sys));

  const FrameStack stack =
      simulate_frames(exact, config.detector, config.n_frames,
                      derive_seed(config.master_seed, kStreamFrames, 0));
  save_frames(dir + "/frames.bin", stack);

  const Eigen::MatrixXd est = estimate_g2(stack);
  const G2Projection exact_minus = project(exact, ProjectionAxis::minus);

  // Minus projection of the raw estimate (plain anti-diagonal sums).
  const int n = grid.n();
  G2Projection est_minus;
  est_minus.axis = ProjectionAxis::minus;
  est_minus.n_pixels = n;
  est_minus.values = RVec::Zero(2 * n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) est_minus.values(i - j + n - 1) += est(i, j);

  save_projection_csv(dir + "/g2_minus_exact.csv", exact_minus);
  save_projection_csv(dir + "/g2_minus_estimated.csv", est_minus);

  // Pearson correlation over delta != 0 (the zero bin carries the
  // same-frame self-product artifact of the estimator).
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  int count = 0;
  for (int k = 0; k < 2 * n - 1; ++k) {
    if (k == n - 1) continue;
    const double x = exact_minus.values(k);
    const double y = est_minus.values(k);
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
    ++count;
  }
  const double cov = sxy - sx * sy / count;
  const double vx = sxx - sx * sx / count;
  const double vy = syy - sy * sy / count;
  G2FramesSummary summary;
  summary.n_frames = config.n_frames;
  summary.projection_correlation =
      (vx > 0 && vy > 0) ? cov / std::sqrt(vx * vy) : 0.0;
  summary.files = {"frames.bin", "frames.bin.json", "g2_minus_exact.csv",
                   "g2_minus_estimated.csv", "summary.json"};

  nlohmann::json js;
  js["n_frames"] = summary.n_frames;
  js["projection_correlation"] = summary.projection_correlation;
  js["files"] = summary.files;
  js["seed"] = config.master_seed;
  std::ofstream os(dir + "/summary.json", std::ios::binary);
  if (!os) throw IoError("g2-frames: cannot write summary.json");
  os << js.dump(2) << "\n";
  return summary;
}

}  // namespace tpsh
