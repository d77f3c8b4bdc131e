// heatk: command-line driver for the conductivity reconstruction pipeline.
//
// Every stage reads and writes plain files in a working directory:
//   config.json          experiment record (phantom + run settings)
//   k_true.field         rasterized true conductivity
//   u.field ux.field uy.field   forward solution sampled at cell centers
//   A.matrix F.matrix    design system
//   lcurve.csv alpha.txt L-curve sweep and selected alpha
//   K.field classes.field diagnostics.txt   reconstruction
//   metrics.txt          comparison against k_true
// PGM quick-looks (*.pgm plus a *.pgm.txt scaling note) accompany fields.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heatk/error.hpp"
#include "heatk/pipeline.hpp"

namespace fs = std::filesystem;
using namespace heatk;

namespace {

constexpr int kExitFile = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

fs::path require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw FileError("missing input file: " + p.string());
  return p;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(require_file(p));
  if (!in) throw FileError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FileError("cannot create directory " + dir.string());
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw FileError("cannot write " + p.string());
  out << text;
  if (!out) throw FileError("write failed: " + p.string());
}

ScalarField load(const fs::path& p, FieldRole role = FieldRole::coefficient) {
  require_file(p);
  return load_field(p.string(), role);
}

void save(const fs::path& p, const ScalarField& f) {
  try {
    save_field(p.string(), f);
  } catch (const std::exception& e) {
    throw FileError(e.what());
  }
}

// 8-bit text PGM, top row is the largest y so the picture is upright.
void save_pgm(const fs::path& p, const ScalarField& f) {
  const Grid& g = f.grid();
  double lo = f[0], hi = f[0];
  for (double v : f.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::ostringstream os;
  os << "P2\n" << g.nx() << ' ' << g.ny() << "\n255\n";
  for (int j = g.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double v = f[g.index(i, j)];
      const int level = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
      os << level << (i + 1 < g.nx() ? ' ' : '\n');
    }
  }
  write_text(p, os.str());
  std::ostringstream note;
  note << std::setprecision(17) << "scaling=linear min-max\nmin=" << lo << "\nmax=" << hi
       << "\nblack=min\nwhite=max\n";
  write_text(p.string() + ".txt", note.str());
}

void save_with_image(const fs::path& dir, const std::string& stem, const ScalarField& f) {
  save(dir / (stem + ".field"), f);
  save_pgm(dir / (stem + ".pgm"), f);
}

PipelineConfig load_config(const fs::path& p) {
  try {
    return pipeline_config_from_json(read_text(p));
  } catch (const ParseError& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

Eigen::MatrixXd load_mat(const fs::path& p) {
  require_file(p);
  return load_matrix(p.string());
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::optional<double> parse_alpha(const std::string& s) {
  if (s == "auto") return std::nullopt;
  std::size_t used = 0;
  double a = 0.0;
  try {
    a = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(a > 0.0) || !std::isfinite(a)) {
    throw InvalidArgument("--alpha must be a positive number or 'auto', got '" + s + "'");
  }
  return a;
}

SampledSolution load_samples(const fs::path& dir) {
  SampledSolution s{load(dir / "u.field", FieldRole::temperature), load(dir / "ux.field"),
                    load(dir / "uy.field")};
  if (!(s.u.grid() == s.ux.grid()) || !(s.u.grid() == s.uy.grid())) {
    throw InvalidArgument(dir.string() + ": u, ux and uy lie on different grids");
  }
  return s;
}

DesignSystem load_system(const fs::path& dir) {
  DesignSystem sys;
  sys.A = load_mat(dir / "A.matrix");
  const Eigen::MatrixXd F = load_mat(dir / "F.matrix");
  if (F.cols() != 1 || F.rows() != sys.A.rows()) {
    throw InvalidArgument("F.matrix must be a column with as many rows as A.matrix");
  }
  sys.F = F.col(0);
  return sys;
}

// Files that downstream stages expect next to the ones a stage produces.
void carry(const fs::path& in, const fs::path& out, std::initializer_list<const char*> names) {
  std::error_code ec;
  if (fs::exists(out) && fs::equivalent(in, out, ec)) return;
  for (const char* n : names) {
    if (!fs::is_regular_file(in / n)) continue;
    fs::copy_file(in / n, out / n, fs::copy_options::overwrite_existing, ec);
    if (ec) throw FileError("cannot copy " + (in / n).string() + " to " + out.string());
  }
}

std::optional<GradientMask> mask_for(Setting setting, const PipelineConfig& cfg,
                                     const SampledSolution* samples) {
  if (setting != Setting::w2) return std::nullopt;
  return build_mask(samples->ux, samples->uy, samples->u, cfg.spec.gamma_fraction,
                    cfg.spec.gamma_normalizer);
}

// Results shared by invert and pipeline.
int write_reconstruction(const fs::path& out, const Grid& grid, const MaterialPair& pair,
                         const Reconstruction& rec) {
  const Eigen::VectorXd& Kv = rec.result.K;
  ScalarField K(grid, std::vector<double>(Kv.data(), Kv.data() + Kv.size()));
  save_with_image(out, "K", K);
  save_with_image(out, "classes", classify(K, pair));
  if (rec.mask) save(out / "mask.field", mask_field(*rec.mask, grid));
  if (!rec.lcurve.empty()) {
    std::ostringstream csv;
    write_lcurve_csv(csv, rec.lcurve, rec.corner);
    write_text(out / "lcurve.csv", csv.str());
    write_text(out / "alpha.txt", fmt(rec.alpha) + "\n");
  }
  std::ostringstream diag;
  write_diagnostics(diag, rec);
  write_text(out / "diagnostics.txt", diag.str());
  if (!rec.result.diagnostics.converged) {
    std::cerr << "heatk: solver did not converge: " << rec.result.diagnostics.message << '\n';
    return kExitNumerical;
  }
  return 0;
}

Grid grid_for(const PipelineConfig& cfg, const DesignSystem& sys) {
  const Grid grid(Domain::unit_square(), cfg.nx, cfg.ny);
  if (static_cast<Eigen::Index>(grid.size()) != sys.cols()) {
    throw InvalidArgument("A.matrix has " + std::to_string(sys.cols()) + " columns but the grid " +
                          std::to_string(cfg.nx) + "x" + std::to_string(cfg.ny) + " has " +
                          std::to_string(grid.size()) + " cells");
  }
  return grid;
}

struct Args {
  // shared
  std::string out;
  std::string in;
  std::string config;
  unsigned threads = 0;
  std::string gamma_normalizer;
  // phantom / pipeline
  std::string case_id;
  std::vector<int> grid;
  int mesh_n = 0;
  int M = 0;
  double noise = -1.0;
  long long seed = -1;
  // inversion
  std::string setting;
  std::string alpha;
  std::string penalizer;
  int points = 0;
  // metrics
  std::string rec;
  std::string truth;
  std::string grad;
  bool exclude_flat = false;
};

void apply_overrides(PipelineConfig& cfg, const Args& a) {
  if (!a.grid.empty()) {
    cfg.nx = a.grid[0];
    cfg.ny = a.grid[1];
  }
  if (a.mesh_n) cfg.mesh_n = a.mesh_n;
  if (a.M) cfg.M = a.M;
  if (a.noise >= 0.0) cfg.noise_level = a.noise;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  if (!a.gamma_normalizer.empty()) cfg.spec.gamma_normalizer = parse_gamma_normalizer(a.gamma_normalizer);
  if (!a.setting.empty()) cfg.reconstruct.setting = parse_setting(a.setting);
  if (!a.alpha.empty()) cfg.reconstruct.alpha = parse_alpha(a.alpha);
  if (a.points) cfg.reconstruct.sweep.points = a.points;
  if (a.threads) cfg.reconstruct.sweep.threads = a.threads;
  if (cfg.nx < 1 || cfg.ny < 1) throw InvalidArgument("--grid needs positive counts");
  if (cfg.mesh_n < 2) throw InvalidArgument("--mesh-n must be at least 2");
  if (cfg.M < 1) throw InvalidArgument("--m must be at least 1");
  cfg.spec.validate();
}

int cmd_phantom(const Args& a) {
  PipelineConfig cfg;
  cfg.spec = make_case(parse_case(a.case_id));
  apply_overrides(cfg, a);
  const Grid grid(Domain::unit_square(), cfg.nx, cfg.ny);
  const ScalarField k = rasterize(cfg.spec, grid);
  const fs::path out(a.out);
  prepare_dir(out);
  write_text(out / "config.json", to_json(cfg) + "\n");
  save_with_image(out, "k_true", k);
  return 0;
}

int cmd_forward(const Args& a) {
  PipelineConfig cfg = load_config(a.config);
  apply_overrides(cfg, a);
  const Grid grid(Domain::unit_square(), cfg.nx, cfg.ny);
  const ScalarField k = rasterize(cfg.spec, grid);
  const SampledSolution s =
      with_noise(forward_samples(cfg.spec, grid, cfg.mesh_n), cfg.noise_level, cfg.seed);
  const fs::path out(a.out);
  prepare_dir(out);
  write_text(out / "config.json", to_json(cfg) + "\n");
  save_with_image(out, "k_true", k);
  save_with_image(out, "u", s.u);
  save(out / "ux.field", s.ux);
  save(out / "uy.field", s.uy);
  return 0;
}

int cmd_assemble(const Args& a) {
  const fs::path in(a.in), out(a.out);
  PipelineConfig cfg = load_config(in / "config.json");
  apply_overrides(cfg, a);
  const SampledSolution s = load_samples(in);
  DesignSystem sys = assemble_from(s, cfg.spec.c, cfg.M);
  prepare_dir(out);
  carry(in, out, {"u.field", "ux.field", "uy.field", "k_true.field"});
  write_text(out / "config.json", to_json(cfg) + "\n");
  save_matrix((out / "A.matrix").string(), sys.A);
  save_matrix((out / "F.matrix").string(), Eigen::MatrixXd(sys.F));
  return 0;
}

int cmd_lcurve(const Args& a) {
  const fs::path in(a.in), out(a.out);
  PipelineConfig cfg = load_config(in / "config.json");
  apply_overrides(cfg, a);
  const Setting setting = parse_setting(a.penalizer);
  if (setting == Setting::lsq) throw InvalidArgument("--penalizer must be w1 or w2");
  const DesignSystem sys = load_system(in);
  grid_for(cfg, sys);
  std::optional<SampledSolution> samples;
  if (setting == Setting::w2) samples = load_samples(in);
  const auto mask = mask_for(setting, cfg, samples ? &*samples : nullptr);

  const PenalizerSpec pen =
      setting == Setting::w2
          ? PenalizerSpec{W2Penalty::from(*mask, cfg.spec.pair)}
          : PenalizerSpec{W1Penalty{cfg.spec.pair, cfg.reconstruct.w1,
                                    default_w1_init(sys, cfg.spec.pair)}};
  const SweepOptions& sw = cfg.reconstruct.sweep;
  const auto alphas = default_alphas(condition_number(sys).sigma_max, sw.points, sw.lo, sw.hi);
  const auto points = sweep(sys, pen, alphas, sw.threads);
  std::optional<Corner> corner;
  std::string failure;
  try {
    corner = select_corner(points);
  } catch (const NoCornerError& e) {
    failure = e.what();
  }
  prepare_dir(out);
  std::ostringstream csv;
  write_lcurve_csv(csv, points, corner);
  write_text(out / "lcurve.csv", csv.str());
  if (!corner) {
    std::cerr << "heatk: " << failure << '\n';
    return kExitNumerical;
  }
  write_text(out / "alpha.txt", fmt(corner->alpha) + "\n");
  std::cout << "alpha=" << fmt(corner->alpha) << '\n';
  return 0;
}

int cmd_invert(const Args& a) {
  const fs::path in(a.in), out(a.out);
  PipelineConfig cfg = load_config(in / "config.json");
  apply_overrides(cfg, a);
  const DesignSystem sys = load_system(in);
  const Grid grid = grid_for(cfg, sys);
  const Setting setting = cfg.reconstruct.setting;
  std::optional<SampledSolution> samples;
  if (setting == Setting::w2) samples = load_samples(in);
  auto mask = mask_for(setting, cfg, samples ? &*samples : nullptr);
  const Reconstruction rec = reconstruct(sys, cfg.spec.pair, cfg.reconstruct, std::move(mask));
  prepare_dir(out);
  return write_reconstruction(out, grid, cfg.spec.pair, rec);
}

int cmd_metrics(const Args& a) {
  const fs::path rec_path(a.rec), true_path(a.truth);
  const ScalarField rec = load(rec_path);
  const ScalarField truth = load(true_path);
  if (!(rec.grid() == truth.grid())) throw InvalidArgument("--rec and --true lie on different grids");
  const auto pair = infer_pair(truth);
  if (!pair) throw InvalidArgument(true_path.string() + " does not hold exactly two positive values");
  std::vector<std::uint8_t> flat;
  if (a.exclude_flat) {
    const fs::path gdir = a.grad.empty() ? rec_path.parent_path() : fs::path(a.grad);
    const ScalarField ux = load(gdir / "ux.field");
    const ScalarField uy = load(gdir / "uy.field");
    if (!(ux.grid() == rec.grid())) throw InvalidArgument("gradient fields lie on a different grid");
    flat = flat_gradient_mask(ux, uy);
  }
  const MetricsReport report = compare(rec, truth, *pair, flat);
  std::ostringstream os;
  write_report(os, report);
  if (!a.out.empty()) {
    const fs::path out(a.out);
    if (out.has_parent_path()) prepare_dir(out.parent_path());
    write_text(out, os.str());
  }
  std::cout << os.str();
  return 0;
}

int cmd_pipeline(const Args& a) {
  PipelineConfig cfg;
  if (!a.config.empty()) {
    cfg = load_config(a.config);
    if (!a.case_id.empty()) throw InvalidArgument("give either --case or --config, not both");
  } else {
    if (a.case_id.empty()) throw InvalidArgument("pipeline needs --case or --config");
    cfg.spec = make_case(parse_case(a.case_id));
  }
  apply_overrides(cfg, a);
  const fs::path out(a.out.empty() ? "heatk-" + cfg.spec.name + "-" +
                                         to_string(cfg.reconstruct.setting)
                                   : a.out);

  const PipelineResult r = run_pipeline(cfg);
  prepare_dir(out);
  write_text(out / "config.json", to_json(cfg) + "\n");
  save_with_image(out, "k_true", r.k_true);
  save_with_image(out, "u", r.samples.u);
  save(out / "ux.field", r.samples.ux);
  save(out / "uy.field", r.samples.uy);
  save_matrix((out / "A.matrix").string(), r.system.A);
  save_matrix((out / "F.matrix").string(), Eigen::MatrixXd(r.system.F));
  const int status = write_reconstruction(out, r.K.grid(), cfg.spec.pair, r.reconstruction);
  std::ostringstream rep;
  write_report(rep, r.metrics);
  write_text(out / "metrics.txt", rep.str());
  std::cout << "output=" << out.string() << '\n'
            << "setting=" << to_string(cfg.reconstruct.setting) << '\n'
            << "alpha=" << fmt(r.reconstruction.alpha) << '\n'
            << rep.str();
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-material conductivity reconstruction from interior temperature data"};
  app.require_subcommand(1);
  Args a;

  auto add_run_flags = [&a](CLI::App* c) {
    c->add_option("--grid", a.grid, "Inverse grid cells NX NY")->expected(2);
    c->add_option("--mesh-n", a.mesh_n, "Forward mesh elements per side");
    c->add_option("--noise", a.noise, "Relative Gaussian noise on u and its gradient");
    c->add_option("--seed", a.seed, "Noise seed");
  };
  auto add_inverse_flags = [&a](CLI::App* c) {
    c->add_option("--gamma-normalizer", a.gamma_normalizer,
                  "Mask threshold scale: temperature (max|u|) or gradient (max|grad u|)");
    c->add_option("--points", a.points, "Number of alphas in the L-curve sweep");
    c->add_option("--threads", a.threads, "Sweep threads (default HEATK_THREADS or all cores)");
  };

  auto* phantom = app.add_subcommand("phantom", "Write a reference layout and its config");
  phantom->add_option("--case", a.case_id, "I, II, III or IV")->required();
  phantom->add_option("--out", a.out)->required();
  add_run_flags(phantom);

  auto* forward = app.add_subcommand("forward", "Solve the forward problem of a config");
  forward->add_option("--config", a.config)->required();
  forward->add_option("--out", a.out)->required();
  add_run_flags(forward);

  auto* assemble = app.add_subcommand("assemble", "Build A and F from sampled temperatures");
  assemble->add_option("--m", a.M, "Test-function family size M");
  assemble->add_option("--in", a.in)->required();
  assemble->add_option("--out", a.out)->required();

  auto* lcurve = app.add_subcommand("lcurve", "Sweep alpha and pick the L-curve corner");
  lcurve->add_option("--penalizer", a.penalizer, "w1 or w2")->required();
  lcurve->add_option("--in", a.in)->required();
  lcurve->add_option("--out", a.out)->required();
  add_inverse_flags(lcurve);

  auto* invert = app.add_subcommand("invert", "Reconstruct K from an assembled system");
  invert->add_option("--setting", a.setting, "lsq, w1 or w2")->required();
  invert->add_option("--alpha", a.alpha, "Positive value or 'auto'")->default_str("auto");
  invert->add_option("--in", a.in)->required();
  invert->add_option("--out", a.out)->required();
  add_inverse_flags(invert);

  auto* metrics = app.add_subcommand("metrics", "Compare a reconstruction with the truth");
  metrics->add_option("--rec", a.rec)->required();
  metrics->add_option("--true", a.truth)->required();
  metrics->add_flag("--exclude-flat", a.exclude_flat, "Also report the rate over identifiable cells");
  metrics->add_option("--grad", a.grad, "Directory with ux.field and uy.field (default: beside --rec)");
  metrics->add_option("--out", a.out, "Also write the report to this file");

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage for one experiment");
  pipeline->add_option("--case", a.case_id, "I, II, III or IV");
  pipeline->add_option("--config", a.config, "Experiment config instead of --case");
  pipeline->add_option("--setting", a.setting, "lsq, w1 or w2");
  pipeline->add_option("--alpha", a.alpha, "Positive value or 'auto'");
  pipeline->add_option("--m", a.M, "Test-function family size M");
  pipeline->add_option("--out", a.out);
  add_run_flags(pipeline);
  add_inverse_flags(pipeline);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*phantom) return cmd_phantom(a);
    if (*forward) return cmd_forward(a);
    if (*assemble) return cmd_assemble(a);
    if (*lcurve) return cmd_lcurve(a);
    if (*invert) return cmd_invert(a);
    if (*metrics) return cmd_metrics(a);
    if (*pipeline) return cmd_pipeline(a);
  } catch (const FileError& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitFile;
  } catch (const InvalidArgument& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OutOfDomain& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SolverError& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const EvaluationError& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "heatk: " << e.what() << '\n';
    return kExitFile;
  }
  return kExitUsage;
}
