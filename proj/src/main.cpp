#include "excur/errors.hpp"
#include "excur/excursion.hpp"
#include "excur/field_sim.hpp"
#include "excur/gkf.hpp"
#include "excur/harness.hpp"
#include "excur/inference.hpp"
#include "excur/io.hpp"
#include "excur/limit_law.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  int replicas = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
  auto* c = cmd->add_option("--config", opts.config_path,
                            "experiment configuration (JSON or TOML)");
  if (config_required) c->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads, 0 = hardware");
  cmd->add_option("--replicas", opts.replicas, "Monte Carlo replicas");
}

excur::ExperimentConfig resolve_config(const CommonOpts& opts,
                                       excur::ExperimentKind kind) {
  excur::ExperimentConfig cfg = excur::load_config(opts.config_path);
  cfg.kind = kind;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed_set) cfg.master_seed = opts.seed;
  if (opts.threads >= 0) cfg.threads = opts.threads;
  if (opts.replicas > 0) cfg.replicas = opts.replicas;
  return cfg;
}

int cmd_simulate(const CommonOpts& opts, bool dump_pair) {
  excur::ExperimentConfig cfg =
      resolve_config(opts, excur::ExperimentKind::CurvatureSweep);
  cfg.model.validate();
  cfg.grid.validate();
  std::filesystem::create_directories(cfg.out_dir);

  const excur::EmbeddingPlan plan =
      excur::plan_embedding(cfg.model, cfg.grid, cfg.clip_tol);
  auto fields = excur::simulate_gaussian_pair(plan, cfg.master_seed);

  excur::PhiloxStream x_rng(
      excur::derive_seed(cfg.master_seed, 0, "simulate:x"),
      excur::kLanePerturbation);
  if (cfg.pspec.epsilon > 0.0) {
    const double x = excur::sample_perturbation_value(cfg.pspec, x_rng);
    fields.first = excur::perturb(fields.first, cfg.pspec, x);
  }

  const std::filesystem::path dir(cfg.out_dir);
  const std::string main_path = (dir / "field.bin").string();
  excur::dump_field(fields.first, cfg.model, cfg.master_seed, main_path);
  std::cout << main_path << "\n";
  if (dump_pair) {
    const std::string twin_path = (dir / "field_pair.bin").string();
    excur::dump_field(fields.second, cfg.model, cfg.master_seed, twin_path);
    std::cout << twin_path << "\n";
  }
  std::cerr << "clipped spectral fraction: " << plan.clipped_fraction << "\n";
  return 0;
}

excur::ExcursionMask load_mask_from_field(const std::string& path, double level) {
  std::ifstream side(path + ".json");
  if (!side)
    throw excur::ConfigError("missing sidecar " + path +
                             ".json (needed for grid metadata)");
  nlohmann::json meta;
  side >> meta;
  excur::FieldRealization field;
  field.grid.nx = meta.at("nx").get<std::int64_t>();
  field.grid.ny = meta.at("ny").get<std::int64_t>();
  field.grid.delta = meta.at("delta").get<double>();
  field.grid.validate();
  const std::size_t n = static_cast<std::size_t>(field.grid.nx) *
                        static_cast<std::size_t>(field.grid.ny);
  field.values.resize(n);
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw excur::ConfigError("cannot open field file " + path);
  bin.read(reinterpret_cast<char*>(field.values.data()),
           static_cast<std::streamsize>(n * sizeof(double)));
  if (static_cast<std::size_t>(bin.gcount()) != n * sizeof(double))
    throw excur::ConfigError("field file " + path + " is truncated");
  return excur::excursion_mask(field, level);
}

int cmd_lk(const std::string& field_path, const std::string& pbm_path,
           double level, double delta) {
  excur::ExcursionMask mask;
  if (!field_path.empty()) {
    mask = load_mask_from_field(field_path, level);
  } else {
    mask = excur::read_pbm(pbm_path, delta);
    mask.level = level;
  }
  const excur::LKEstimate est = excur::lk_full(mask);
  const double crofton = excur::crofton_half_perimeter(mask);

  excur::CsvTable table({"level", "l0", "l1", "l2", "chi4", "chi8",
                         "l1_crofton", "c0_over_t", "c1_over_t", "c2_over_t",
                         "c0_hat", "c1_hat", "c2_hat"});
  using excur::format_double;
  table.add_row({format_double(mask.level), format_double(est.l0),
                 format_double(est.l1), format_double(est.l2),
                 format_double(est.chi4), format_double(est.chi8),
                 format_double(crofton), format_double(est.c_over_t.c0),
                 format_double(est.c_over_t.c1), format_double(est.c_over_t.c2),
                 format_double(est.c_hat.c0), format_double(est.c_hat.c1),
                 format_double(est.c_hat.c2)});
  std::cout << table.to_string();
  return 0;
}

int cmd_theory(const CommonOpts& opts) {
  excur::ExperimentConfig cfg =
      resolve_config(opts, excur::ExperimentKind::CurvatureSweep);
  if (cfg.levels.empty()) throw excur::ConfigError("theory needs levels");
  std::filesystem::create_directories(cfg.out_dir);

  const double e2m2 = cfg.pspec.epsilon * cfg.pspec.epsilon * cfg.pspec.m2();
  excur::CsvTable table({"level", "c0", "c1", "c2", "variant"});
  using excur::format_double;
  for (double u : cfg.levels) {
    const auto g = excur::curvature_densities(cfg.model, u);
    const auto f = excur::perturbed_densities(cfg.model, u, e2m2);
    const auto mg = excur::expected_normalized(g, cfg.grid);
    const auto mf = excur::expected_normalized(f, cfg.grid);
    table.add_row({format_double(u), format_double(g.c0), format_double(g.c1),
                   format_double(g.c2), "gaussian"});
    table.add_row({format_double(u), format_double(f.c0), format_double(f.c1),
                   format_double(f.c2), "perturbed"});
    table.add_row({format_double(u), format_double(mg.c0), format_double(mg.c1),
                   format_double(mg.c2), "mean_gaussian"});
    table.add_row({format_double(u), format_double(mf.c0), format_double(mf.c1),
                   format_double(mf.c2), "mean_perturbed"});
  }
  const std::filesystem::path csv_path =
      std::filesystem::path(cfg.out_dir) / "theory.csv";
  table.write(csv_path.string());
  excur::write_manifest(
      (std::filesystem::path(cfg.out_dir) / "theory_manifest.json").string(),
      "theory", cfg.echo(), {{"theory.csv", excur::content_hash(table.to_string())}},
      0.0, nullptr);
  std::cout << csv_path.string() << "\n";
  return 0;
}

int cmd_limit_density(const CommonOpts& opts) {
  excur::ExperimentConfig cfg =
      resolve_config(opts, excur::ExperimentKind::Histogram);
  if (cfg.levels.empty()) throw excur::ConfigError("limit-density needs a level");
  std::filesystem::create_directories(cfg.out_dir);
  const double u = cfg.levels.front();

  const excur::LimitLawParams params =
      excur::limit_law_params(cfg.model, u, cfg.pspec);
  excur::CsvTable table({"y", "h_tilde", "h_exact", "f_bep0", "f_bep2", "f_bep4"});
  using excur::format_double;
  const double step = 2.0 * cfg.y_half_range / (cfg.y_points - 1);
  for (int i = 0; i < cfg.y_points; ++i) {
    const double y = -cfg.y_half_range + i * step;
    table.add_row({format_double(y),
                   format_double(excur::truncated_limit_density(params, y)),
                   format_double(excur::exact_mixture_density(cfg.model, u,
                                                              cfg.pspec, y)),
                   format_double(excur::bep_density(params.v, 0, y)),
                   format_double(excur::bep_density(params.v, 2, y)),
                   format_double(excur::bep_density(params.v, 4, y))});
  }

  const auto diag = excur::truncated_density_diagnostics(
      params, cfg.y_half_range, cfg.y_points);
  nlohmann::json extra;
  extra["v_u"] = params.v;
  extra["vp_u"] = params.vp;
  extra["vpp_u"] = params.vpp;
  extra["gamma1"] = params.gamma1;
  extra["gamma2"] = params.gamma2;
  extra["h_tilde_integral"] = diag.integral;
  extra["h_tilde_min"] = diag.min_value;
  extra["h_tilde_min_at"] = diag.min_location;

  const std::filesystem::path csv_path =
      std::filesystem::path(cfg.out_dir) / "limit_density.csv";
  table.write(csv_path.string());
  excur::write_manifest(
      (std::filesystem::path(cfg.out_dir) / "limit_density_manifest.json")
          .string(),
      "limit_density", cfg.echo(),
      {{"limit_density.csv", excur::content_hash(table.to_string())}}, 0.0,
      extra);
  std::cout << csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Gaussian excursion-set curvature simulator: circulant-embedding "
      "field simulation, Lipschitz-Killing curvature estimation, limit-law "
      "evaluation, and Monte Carlo experiment drivers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "excur 1.0.0");

  CommonOpts sim_opts;
  bool dump_pair = false;
  CLI::App* sim = app.add_subcommand(
      "simulate", "simulate one field realization and dump it");
  add_common(sim, sim_opts, true);
  sim->add_flag("--pair", dump_pair,
                "also dump the second field of the complex draw");

  std::string lk_field, lk_pbm;
  double lk_level = 0.0, lk_delta = 1.0;
  CLI::App* lk = app.add_subcommand(
      "lk", "Lipschitz-Killing curvatures of one excursion mask");
  auto* lk_field_opt =
      lk->add_option("--field", lk_field, "field dump (with .json sidecar)");
  auto* lk_pbm_opt = lk->add_option("--pbm", lk_pbm, "binary PBM mask");
  lk->add_option("--level", lk_level, "threshold level u");
  lk->add_option("--delta", lk_delta, "pixel spacing for PBM input");
  lk_field_opt->excludes(lk_pbm_opt);

  CommonOpts theory_opts;
  CLI::App* theory = app.add_subcommand(
      "theory", "closed-form curvature densities and means across levels");
  add_common(theory, theory_opts, true);

  CommonOpts density_opts;
  CLI::App* density = app.add_subcommand(
      "limit-density", "limit-law density curves on a y grid");
  add_common(density, density_opts, true);

  CommonOpts curv_opts, hist_opts, infer_opts, clt_opts;
  CLI::App* curv = app.add_subcommand(
      "mc-curvatures", "Monte Carlo curvature sweep across levels");
  add_common(curv, curv_opts, true);
  CLI::App* hist = app.add_subcommand(
      "mc-histogram", "Monte Carlo histogram of the centered scaled area");
  add_common(hist, hist_opts, true);
  CLI::App* infer = app.add_subcommand(
      "mc-infer", "Monte Carlo study of the perturbation estimator");
  add_common(infer, infer_opts, true);
  CLI::App* clt = app.add_subcommand(
      "mc-clt", "joint small-epsilon large-domain normality check");
  add_common(clt, clt_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts, dump_pair);
    if (lk->parsed()) {
      if (lk_field.empty() == lk_pbm.empty())
        throw excur::ConfigError("lk needs exactly one of --field or --pbm");
      if (!lk_field.empty() && lk->count("--level") == 0)
        throw excur::ConfigError("lk --field requires --level");
      return cmd_lk(lk_field, lk_pbm, lk_level, lk_delta);
    }
    if (theory->parsed()) return cmd_theory(theory_opts);
    if (density->parsed()) return cmd_limit_density(density_opts);

    excur::ExperimentResult result;
    if (curv->parsed()) {
      result = excur::run_curvature_sweep(
          resolve_config(curv_opts, excur::ExperimentKind::CurvatureSweep));
    } else if (hist->parsed()) {
      result = excur::run_histogram_experiment(
          resolve_config(hist_opts, excur::ExperimentKind::Histogram));
    } else if (infer->parsed()) {
      result = excur::run_inference_experiment(
          resolve_config(infer_opts, excur::ExperimentKind::Inference));
    } else if (clt->parsed()) {
      result = excur::run_clt_experiment(
          resolve_config(clt_opts, excur::ExperimentKind::Clt));
    }
    for (const auto& p : result.csv_paths) std::cout << p << "\n";
    if (!result.manifest_path.empty())
      std::cout << result.manifest_path << "\n";
    return 0;
  } catch (const excur::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const excur::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const excur::EmbeddingError& e) {
    std::cerr << "embedding failure: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
