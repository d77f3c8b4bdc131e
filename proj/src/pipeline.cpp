#include "heatk/pipeline.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>

#include <json.hpp>

#include "heatk/error.hpp"

namespace heatk {

Setting parse_setting(const std::string& s) {
  if (s == "lsq") return Setting::lsq;
  if (s == "w1") return Setting::w1;
  if (s == "w2") return Setting::w2;
  throw InvalidArgument("unknown setting '" + s + "' (expected lsq, w1 or w2)");
}

std::string to_string(Setting s) {
  switch (s) {
    case Setting::lsq: return "lsq";
    case Setting::w1: return "w1";
    case Setting::w2: return "w2";
  }
  return "?";
}

Reconstruction reconstruct(const DesignSystem& system, const MaterialPair& pair,
                           const ReconstructOptions& opt, std::optional<GradientMask> mask) {
  Reconstruction rec;
  rec.setting = opt.setting;
  if (opt.setting == Setting::lsq) {
    rec.result = min_norm_least_squares(system);
    return rec;
  }
  if (opt.setting == Setting::w2) {
    if (!mask) throw InvalidArgument("W2 reconstruction needs a gradient mask");
    if (mask->size() != static_cast<std::size_t>(system.cols())) {
      throw InvalidArgument("W2 mask has " + std::to_string(mask->size()) + " cells, system has " +
                            std::to_string(system.cols()) + " columns");
    }
    rec.mask = std::move(mask);
  }
  const PenalizerSpec pen = opt.setting == Setting::w2
                                ? PenalizerSpec{W2Penalty::from(*rec.mask, pair)}
                                : PenalizerSpec{W1Penalty{pair, opt.w1, default_w1_init(system, pair)}};

  if (opt.alpha) {
    if (!(*opt.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
    rec.alpha = *opt.alpha;
  } else {
    const double smax = condition_number(system).sigma_max;
    const auto alphas = default_alphas(smax, opt.sweep.points, opt.sweep.lo, opt.sweep.hi);
    rec.lcurve = sweep(system, pen, alphas, opt.sweep.threads);
    rec.corner = select_corner(rec.lcurve);
    rec.alpha = rec.corner->alpha;
  }

  if (opt.setting == Setting::w2) {
    rec.result = solve_w2(system, *rec.mask, pair, rec.alpha);
  } else {
    const auto& p1 = std::get<W1Penalty>(pen);
    rec.result = solve_w1(system, pair, rec.alpha, *p1.init, opt.w1);
  }
  return rec;
}

Reconstruction reconstruct(const DesignSystem& system, const SampledSolution& samples,
                           const MaterialPair& pair, double gamma_fraction,
                           const ReconstructOptions& opt, GammaNormalizer normalizer) {
  std::optional<GradientMask> mask;
  if (opt.setting == Setting::w2) {
    mask = build_mask(samples.ux, samples.uy, samples.u, gamma_fraction, normalizer);
  }
  return reconstruct(system, pair, opt, std::move(mask));
}

void write_diagnostics(std::ostream& os, const Reconstruction& rec) {
  const SolveDiagnostics& d = rec.result.diagnostics;
  os << std::setprecision(17);
  os << "setting=" << to_string(rec.setting) << '\n';
  os << "alpha=" << rec.alpha << '\n';
  os << "alpha_source=" << (rec.corner ? "lcurve" : "fixed") << '\n';
  if (rec.mask) {
    os << "mask_cells=" << rec.mask->count() << '\n';
    os << "mask_gamma=" << rec.mask->gamma << '\n';
  }
  os << "residual_norm=" << d.residual_norm << '\n';
  os << "penalty_value=" << d.penalty_value << '\n';
  os << "iterations=" << d.iterations << '\n';
  os << "converged=" << (d.converged ? "true" : "false") << '\n';
  os << "degenerate=" << (d.degenerate ? "true" : "false") << '\n';
  os << "gradient_norm=" << d.gradient_norm << '\n';
  os << "sigma_max=" << d.conditioning.sigma_max << '\n';
  os << "sigma_min=" << d.conditioning.sigma_min << '\n';
  os << "condition_number=" << d.conditioning.condition_number << '\n';
  os << "truncation_threshold=" << d.conditioning.threshold << '\n';
  os << "rank=" << d.rank << '\n';
  if (!d.message.empty()) os << "message=" << d.message << '\n';
}

SampledSolution forward_samples(const PhantomSpec& spec, const Grid& grid, int mesh_n) {
  const TemperatureSolution sol = solve_forward(forward_problem(spec, mesh_n));
  return sample_solution(sol, grid);
}

SampledSolution with_noise(const SampledSolution& s, double level, std::uint64_t seed) {
  if (level == 0.0) return s;
  return {add_noise(s.u, level, seed), add_noise(s.ux, level, seed + 1),
          add_noise(s.uy, level, seed + 2)};
}

DesignSystem assemble_from(const SampledSolution& samples, double c, int M) {
  const ScalarField cf = ScalarField::constant(samples.u.grid(), c);
  return assemble(samples.u, samples.ux, samples.uy, cf, enumerate_family(M));
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.spec.validate();
  const Grid grid(Domain::unit_square(), cfg.nx, cfg.ny);
  ScalarField k_true = rasterize(cfg.spec, grid);
  SampledSolution samples =
      with_noise(forward_samples(cfg.spec, grid, cfg.mesh_n), cfg.noise_level, cfg.seed);
  DesignSystem system = assemble_from(samples, cfg.spec.c, cfg.M);
  system.source = cfg.spec.name;
  Reconstruction rec =
      reconstruct(system, samples, cfg.spec.pair, cfg.spec.gamma_fraction,
                  cfg.reconstruct, cfg.spec.gamma_normalizer);

  std::vector<double> kv(rec.result.K.data(), rec.result.K.data() + rec.result.K.size());
  ScalarField K(grid, std::move(kv));
  ScalarField classes = classify(K, cfg.spec.pair);
  const auto flat = flat_gradient_mask(samples.ux, samples.uy);
  MetricsReport metrics = compare(K, k_true, cfg.spec.pair, flat);
  return {std::move(k_true), std::move(samples), std::move(system), std::move(rec),
          std::move(K),      std::move(classes), metrics};
}

namespace {

using nlohmann::json;

constexpr std::array kPhantomKeys{"name", "pair", "background", "shapes", "T1",
                                  "T2", "c", "gamma_fraction", "gamma_normalizer"};
constexpr std::array kRunKeys{"case", "grid",  "mesh_n",      "M",    "setting", "alpha",
                              "sweep", "noise_level", "seed", "w1"};

bool known(const std::string& key) {
  auto eq = [&](const char* k) { return key == k; };
  return std::any_of(kPhantomKeys.begin(), kPhantomKeys.end(), eq) ||
         std::any_of(kRunKeys.begin(), kRunKeys.end(), eq);
}

}  // namespace

std::string to_json(const PipelineConfig& cfg) {
  json j = json::parse(to_json(cfg.spec));
  j["grid"] = {cfg.nx, cfg.ny};
  j["mesh_n"] = cfg.mesh_n;
  j["M"] = cfg.M;
  j["setting"] = to_string(cfg.reconstruct.setting);
  if (cfg.reconstruct.alpha) {
    j["alpha"] = *cfg.reconstruct.alpha;
  } else {
    j["alpha"] = "auto";
  }
  const SweepOptions& sw = cfg.reconstruct.sweep;
  j["sweep"] = {{"points", sw.points}, {"lo", sw.lo}, {"hi", sw.hi}};
  const W1Options& w1 = cfg.reconstruct.w1;
  j["w1"] = {{"max_iters", w1.max_iters}, {"grad_tol", w1.grad_tol}};
  j["noise_level"] = cfg.noise_level;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config JSON: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (!known(key)) throw ParseError("config JSON: unknown key '" + key + "'");
  }
  PipelineConfig cfg;
  json phantom = json::object();
  if (j.contains("case")) {
    try {
      phantom = json::parse(to_json(make_case(parse_case(j["case"].get<std::string>()))));
    } catch (const std::exception& e) {
      throw ParseError(std::string("config JSON: bad value for 'case': ") + e.what());
    }
  }
  for (const char* k : kPhantomKeys) {
    if (j.contains(k)) phantom[k] = j[k];
  }
  cfg.spec = phantom_from_json(phantom.dump());

  std::string key;
  try {
    key = "grid";
    if (j.contains(key)) {
      cfg.nx = j[key].at(0).get<int>();
      cfg.ny = j[key].at(1).get<int>();
    }
    key = "mesh_n";
    cfg.mesh_n = j.value(key, cfg.mesh_n);
    key = "M";
    cfg.M = j.value(key, cfg.M);
    key = "setting";
    if (j.contains(key)) cfg.reconstruct.setting = parse_setting(j[key].get<std::string>());
    key = "alpha";
    if (j.contains(key)) {
      if (j[key].is_string()) {
        if (j[key].get<std::string>() != "auto") throw ParseError("alpha must be a number or \"auto\"");
      } else {
        cfg.reconstruct.alpha = j[key].get<double>();
      }
    }
    key = "sweep";
    if (j.contains(key)) {
      SweepOptions& sw = cfg.reconstruct.sweep;
      sw.points = j[key].value("points", sw.points);
      sw.lo = j[key].value("lo", sw.lo);
      sw.hi = j[key].value("hi", sw.hi);
    }
    key = "w1";
    if (j.contains(key)) {
      W1Options& w1 = cfg.reconstruct.w1;
      w1.max_iters = j[key].value("max_iters", w1.max_iters);
      w1.grad_tol = j[key].value("grad_tol", w1.grad_tol);
    }
    key = "noise_level";
    cfg.noise_level = j.value(key, cfg.noise_level);
    key = "seed";
    cfg.seed = j.value(key, cfg.seed);
  } catch (const json::exception& e) {
    throw ParseError("config JSON: bad value for '" + key + "': " + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError("config JSON: bad value for '" + key + "': " + e.what());
  }
  if (cfg.nx < 1 || cfg.ny < 1) throw ParseError("config JSON: bad value for 'grid'");
  if (cfg.mesh_n < 2) throw ParseError("config JSON: bad value for 'mesh_n'");
  if (cfg.M < 1) throw ParseError("config JSON: bad value for 'M'");
  if (cfg.reconstruct.alpha && !(*cfg.reconstruct.alpha > 0.0)) {
    throw ParseError("config JSON: bad value for 'alpha'");
  }
  if (!(cfg.noise_level >= 0.0)) throw ParseError("config JSON: bad value for 'noise_level'");
  return cfg;
}

}  // namespace heatk
