#include "excur/harness.hpp"

#include "excur/errors.hpp"
#include "excur/excursion.hpp"
#include "excur/field_sim.hpp"
#include "excur/gkf.hpp"
#include "excur/inference.hpp"
#include "excur/io.hpp"
#include "excur/limit_law.hpp"
#include "excur/stats.hpp"
#include "excur/toml_lite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace excur {

namespace {

std::string kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CurvatureSweep: return "curvature_sweep";
    case ExperimentKind::Histogram: return "histogram";
    case ExperimentKind::Inference: return "inference";
    case ExperimentKind::Clt: return "clt";
  }
  return "unknown";
}

ExperimentKind kind_from_name(const std::string& name) {
  if (name == "curvature_sweep") return ExperimentKind::CurvatureSweep;
  if (name == "histogram") return ExperimentKind::Histogram;
  if (name == "inference") return ExperimentKind::Inference;
  if (name == "clt") return ExperimentKind::Clt;
  throw ConfigError("unknown experiment '" + name + "'");
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + context);
  }
}

double get_number(const nlohmann::json& j, const char* key, double fallback,
                  bool required = false) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(std::string("missing required key '") + key + "'");
    return fallback;
  }
  if (!j[key].is_number())
    throw ConfigError(std::string("key '") + key + "' must be a number");
  return j[key].get<double>();
}

std::vector<double> get_number_array(const nlohmann::json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  if (!j[key].is_array())
    throw ConfigError(std::string("key '") + key + "' must be an array");
  for (const auto& v : j[key]) {
    if (!v.is_number())
      throw ConfigError(std::string("array '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

struct ReplicaOutput {
  double shift = 0.0;
  std::vector<CurvatureDensities> c_hat;  // bias-corrected triple per level
  std::vector<double> c2_over_t;          // normalized area per level
};

// Shared Monte Carlo core: replica 2p and 2p+1 come from the real and
// imaginary halves of pair p; X draws are seeded per replica so results do
// not depend on scheduling.
std::vector<ReplicaOutput> run_replicas(const EmbeddingPlan& plan,
                                        const PerturbationSpec& pspec,
                                        const std::vector<double>& levels,
                                        int replicas, std::uint64_t master,
                                        const std::string& name, int threads) {
  std::vector<ReplicaOutput> out(static_cast<std::size_t>(replicas));
  const std::int64_t pairs = (replicas + 1) / 2;
  parallel_for(pairs, threads, [&](std::int64_t p) {
    const std::uint64_t seed_g =
        derive_seed(master, static_cast<std::uint64_t>(p), name + ":g");
    auto fields = simulate_gaussian_pair(plan, seed_g);
    for (int half = 0; half < 2; ++half) {
      const std::int64_t i = 2 * p + half;
      if (i >= replicas) break;
      const std::uint64_t seed_x =
          derive_seed(master, static_cast<std::uint64_t>(i), name + ":x");
      PhiloxStream rx(seed_x, kLanePerturbation);
      const double x = sample_perturbation_value(pspec, rx);
      const FieldRealization f =
          perturb(half ? fields.second : fields.first, pspec, x);
      ReplicaOutput& ro = out[static_cast<std::size_t>(i)];
      ro.shift = f.shift;
      ro.c_hat.resize(levels.size());
      ro.c2_over_t.resize(levels.size());
      for (std::size_t l = 0; l < levels.size(); ++l) {
        const LKEstimate est = lk_full(excursion_mask(f, levels[l]));
        ro.c_hat[l] = est.c_hat;
        ro.c2_over_t[l] = est.c_over_t.c2;
      }
    }
  });
  return out;
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + cfg.out_dir);
  return dir;
}

double wall_seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

ExperimentResult finalize(const ExperimentConfig& cfg,
                          const std::filesystem::path& dir,
                          const std::string& csv_name, const CsvTable& table,
                          const nlohmann::json& extra, double wall) {
  const std::string body = table.to_string();
  const std::filesystem::path csv_path = dir / csv_name;
  std::ofstream f(csv_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + csv_path.string());
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  f.close();

  const std::string stem = csv_name.substr(0, csv_name.find_last_of('.'));
  const std::filesystem::path manifest_path = dir / (stem + "_manifest.json");
  write_manifest(manifest_path.string(), kind_name(cfg.kind), cfg.echo(),
                 {{csv_name, content_hash(body)}}, wall, extra);

  ExperimentResult res;
  res.csv_paths = {csv_path.string()};
  res.manifest_path = manifest_path.string();
  res.summary = extra;
  return res;
}

}  // namespace

void ExperimentConfig::validate() const {
  model.validate();
  grid.validate();
  pspec.validate();
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(ci_level > 0.0 && ci_level < 1.0))
    throw ConfigError("ci_level must lie in (0,1)");
  if (!(clip_tol > 0.0)) throw ConfigError("clip_tol must be > 0");
  switch (kind) {
    case ExperimentKind::CurvatureSweep:
      if (levels.empty()) throw ConfigError("curvature_sweep needs levels");
      break;
    case ExperimentKind::Histogram:
      if (levels.empty()) throw ConfigError("histogram needs a level");
      if (theta_draws < 100) throw ConfigError("theta_draws must be >= 100");
      break;
    case ExperimentKind::Inference:
      if (levels.empty()) throw ConfigError("inference needs a level");
      if (levels.front() == 0.0)
        throw ConfigError("inference level must be nonzero; the cubic "
                          "estimator covers u = 0");
      if (epsilons.empty()) throw ConfigError("inference needs epsilons");
      if (model.sigma_g2 != 1.0)
        throw ConfigError("inference requires sigma_g2 = 1");
      break;
    case ExperimentKind::Clt:
      if (levels.empty()) throw ConfigError("clt needs a level");
      if (clt_sizes.empty()) throw ConfigError("clt needs a size schedule");
      if (clt_sizes.size() != clt_epsilons.size())
        throw ConfigError("clt sizes and epsilons must pair up");
      for (auto n : clt_sizes)
        if (n < 2) throw ConfigError("clt sizes must be >= 2");
      break;
  }
  if (y_points < 3) throw ConfigError("y_points must be >= 3");
  if (!(y_half_range > 0.0)) throw ConfigError("y_half_range must be > 0");
}

nlohmann::json ExperimentConfig::echo() const {
  nlohmann::json j;
  j["experiment"] = kind_name(kind);
  j["model"] = {{"sigma_g2", model.sigma_g2}, {"kappa", model.kappa}};
  j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"delta", grid.delta}};
  nlohmann::json p;
  switch (pspec.law) {
    case PerturbLaw::Degenerate: p["law"] = "degenerate"; break;
    case PerturbLaw::Skellam:
      p["law"] = "skellam";
      p["mu"] = pspec.mu1;
      break;
    case PerturbLaw::StudentT:
      p["law"] = "student_t";
      p["nu"] = pspec.nu;
      break;
  }
  p["epsilon"] = pspec.epsilon;
  j["perturbation"] = p;
  j["levels"] = levels;
  if (!epsilons.empty()) j["epsilons"] = epsilons;
  j["replicas"] = replicas;
  j["seed"] = master_seed;
  j["out_dir"] = out_dir;
  j["threads"] = threads;
  j["theta_draws"] = theta_draws;
  j["clip_tol"] = clip_tol;
  j["ci_level"] = ci_level;
  if (!clt_sizes.empty())
    j["clt"] = {{"sizes", clt_sizes}, {"epsilons", clt_epsilons}};
  j["density"] = {{"half_range", y_half_range}, {"points", y_points}};
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config root must be an object");
  check_keys(j,
             {"experiment", "model", "grid", "perturbation", "levels",
              "epsilons", "replicas", "seed", "out_dir", "threads",
              "theta_draws", "clip_tol", "ci_level", "clt", "density"},
             "config root");
  ExperimentConfig cfg;
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("config needs an 'experiment' string");
  cfg.kind = kind_from_name(j["experiment"].get<std::string>());

  if (j.contains("model")) {
    const auto& m = j["model"];
    check_keys(m, {"sigma_g2", "kappa"}, "model");
    cfg.model.sigma_g2 = get_number(m, "sigma_g2", 1.0);
    cfg.model.kappa = get_number(m, "kappa", 100.0 / 1024.0);
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, {"nx", "ny", "delta"}, "grid");
    cfg.grid.nx = static_cast<std::int64_t>(get_number(g, "nx", 1024));
    cfg.grid.ny = static_cast<std::int64_t>(get_number(g, "ny", 1024));
    cfg.grid.delta = get_number(g, "delta", 1.0);
  }
  if (j.contains("perturbation")) {
    const auto& p = j["perturbation"];
    check_keys(p, {"law", "epsilon", "mu", "nu"}, "perturbation");
    const std::string law =
        p.contains("law") ? p["law"].get<std::string>() : "degenerate";
    if (law == "degenerate") {
      cfg.pspec.law = PerturbLaw::Degenerate;
    } else if (law == "skellam") {
      cfg.pspec.law = PerturbLaw::Skellam;
      cfg.pspec.mu1 = cfg.pspec.mu2 = get_number(p, "mu", 1.0);
    } else if (law == "student_t") {
      cfg.pspec.law = PerturbLaw::StudentT;
      cfg.pspec.nu = get_number(p, "nu", 5.0);
    } else {
      throw ConfigError("unknown perturbation law '" + law + "'");
    }
    cfg.pspec.epsilon = get_number(p, "epsilon", 0.0);
  }
  cfg.levels = get_number_array(j, "levels");
  cfg.epsilons = get_number_array(j, "epsilons");
  cfg.replicas = static_cast<int>(get_number(j, "replicas", 100));
  cfg.master_seed = static_cast<std::uint64_t>(get_number(j, "seed", 1));
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) throw ConfigError("out_dir must be a string");
    cfg.out_dir = j["out_dir"].get<std::string>();
  }
  cfg.threads = static_cast<int>(get_number(j, "threads", 0));
  cfg.theta_draws = static_cast<int>(get_number(j, "theta_draws", 100000));
  cfg.clip_tol = get_number(j, "clip_tol", 1e-6);
  cfg.ci_level = get_number(j, "ci_level", 0.95);
  if (j.contains("clt")) {
    const auto& c = j["clt"];
    check_keys(c, {"sizes", "epsilons"}, "clt");
    for (double n : get_number_array(c, "sizes"))
      cfg.clt_sizes.push_back(static_cast<std::int64_t>(n));
    cfg.clt_epsilons = get_number_array(c, "epsilons");
  }
  if (j.contains("density")) {
    const auto& d = j["density"];
    check_keys(d, {"half_range", "points"}, "density");
    cfg.y_half_range = get_number(d, "half_range", 15.0);
    cfg.y_points = static_cast<int>(get_number(d, "points", 301));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  const bool looks_toml = path.size() >= 5 && path.substr(path.size() - 5) == ".toml";
  nlohmann::json j;
  if (looks_toml) {
    j = parse_toml_lite(text);
  } else {
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("cannot parse " + path + " as JSON: " + e.what());
    }
  }
  return config_from_json(j);
}

void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  const int workers =
      std::max(1, std::min<std::int64_t>(resolve_threads(threads), n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load(std::memory_order_relaxed)) return;
        const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
          }
          failed.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentResult run_curvature_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = prepare_out_dir(cfg);
  const EmbeddingPlan plan = plan_embedding(cfg.model, cfg.grid, cfg.clip_tol);
  const auto reps = run_replicas(plan, cfg.pspec, cfg.levels, cfg.replicas,
                                 cfg.master_seed, "curvature_sweep", cfg.threads);

  std::vector<std::string> cols = {"level"};
  for (const char* i : {"c0", "c1", "c2"})
    for (const char* s : {"_mean", "_min", "_max", "_q025", "_q975"})
      cols.push_back(std::string(i) + s);
  for (const char* s : {"c0_gauss", "c1_gauss", "c2_gauss", "c0_perturbed",
                        "c1_perturbed", "c2_perturbed"})
    cols.push_back(s);
  CsvTable table(cols);

  const double e2m2 = cfg.pspec.epsilon * cfg.pspec.epsilon * cfg.pspec.m2();
  for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
    const double u = cfg.levels[l];
    std::vector<std::string> row = {format_double(u)};
    for (int i = 0; i < 3; ++i) {
      std::vector<double> vals;
      vals.reserve(reps.size());
      for (const auto& r : reps) {
        const CurvatureDensities& c = r.c_hat[l];
        vals.push_back(i == 0 ? c.c0 : (i == 1 ? c.c1 : c.c2));
      }
      row.push_back(format_double(sample_mean(vals)));
      row.push_back(format_double(*std::min_element(vals.begin(), vals.end())));
      row.push_back(format_double(*std::max_element(vals.begin(), vals.end())));
      row.push_back(format_double(sample_quantile(vals, 0.025)));
      row.push_back(format_double(sample_quantile(vals, 0.975)));
    }
    const CurvatureDensities g = curvature_densities(cfg.model, u);
    const CurvatureDensities f = perturbed_densities(cfg.model, u, e2m2);
    for (double v : {g.c0, g.c1, g.c2, f.c0, f.c1, f.c2})
      row.push_back(format_double(v));
    table.add_row(row);
  }

  nlohmann::json extra;
  extra["clipped_fraction"] = plan.clipped_fraction;
  return finalize(cfg, dir, "curvature_sweep.csv", table, extra,
                  wall_seconds_since(start));
}

ExperimentResult run_histogram_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = prepare_out_dir(cfg);
  const double u = cfg.levels.front();
  const std::vector<double> one_level = {u};
  const EmbeddingPlan plan = plan_embedding(cfg.model, cfg.grid, cfg.clip_tol);
  const auto reps = run_replicas(plan, cfg.pspec, one_level, cfg.replicas,
                                 cfg.master_seed, "histogram", cfg.threads);

  const double sg = cfg.model.sigma_g();
  const double root_area = std::sqrt(cfg.grid.area());
  std::vector<double> z_values(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const double centered =
        reps[i].c2_over_t[0] - gaussian_tail((u - reps[i].shift) / sg);
    z_values[i] = root_area * centered;
  }

  // large reference sample of the limit law
  ThetaSampler sampler(cfg.model, u, cfg.pspec);
  PhiloxStream theta_rng(derive_seed(cfg.master_seed, 0, "histogram:theta"),
                         kLaneLimitLaw);
  std::vector<double> theta(static_cast<std::size_t>(cfg.theta_draws));
  for (auto& t : theta) t = sampler.sample(theta_rng);
  const double ks = ks_statistic_two_sample(z_values, theta);

  const LimitLawParams params = limit_law_params(cfg.model, u, cfg.pspec);

  CsvTable table({"kind", "replica", "seed", "x", "z", "y", "h_tilde"});
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const std::uint64_t seed_x = derive_seed(cfg.master_seed, i, "histogram:x");
    const double x = cfg.pspec.epsilon > 0.0
                         ? reps[i].shift / cfg.pspec.epsilon
                         : 0.0;
    table.add_row({"sample", std::to_string(i), std::to_string(seed_x),
                   format_double(x), format_double(z_values[i]), "", ""});
  }
  const double step = 2.0 * cfg.y_half_range / (cfg.y_points - 1);
  for (int i = 0; i < cfg.y_points; ++i) {
    const double y = -cfg.y_half_range + i * step;
    table.add_row({"overlay", "", "", "", "", format_double(y),
                   format_double(truncated_limit_density(params, y))});
  }

  nlohmann::json extra;
  extra["ks_distance"] = ks;
  extra["gamma1"] = params.gamma1;
  extra["gamma2"] = params.gamma2;
  extra["v_u"] = params.v;
  extra["theta_draws"] = cfg.theta_draws;
  extra["z_sample_sd"] = std::sqrt(sample_variance(z_values));
  return finalize(cfg, dir, "histogram.csv", table, extra,
                  wall_seconds_since(start));
}

ExperimentResult run_inference_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = prepare_out_dir(cfg);
  const double u = cfg.levels.front();
  const std::vector<double> one_level = {u};
  const EmbeddingPlan plan = plan_embedding(cfg.model, cfg.grid, cfg.clip_tol);
  const double sigma2 = epsilon_asymptotic_variance(cfg.model, u);

  CsvTable table(
      {"epsilon_true", "u", "eps_hat_mean", "ci_low", "ci_high", "n_replicas"});
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t j = 0; j < cfg.epsilons.size(); ++j) {
    PerturbationSpec pspec = cfg.pspec;
    pspec.epsilon = cfg.epsilons[j];
    const std::string name = "inference:" + std::to_string(j);
    const auto reps = run_replicas(plan, pspec, one_level, cfg.replicas,
                                   cfg.master_seed, name, cfg.threads);
    std::vector<double> eps_hats(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i)
      eps_hats[i] = estimate_epsilon(reps[i].c_hat[0].c2, u);
    const double mean = sample_mean(eps_hats);
    const auto [lo, hi] = confidence_interval(
        mean, sigma2, cfg.grid.area() * cfg.replicas, cfg.ci_level);
    table.add_row({format_double(pspec.epsilon), format_double(u),
                   format_double(mean), format_double(lo), format_double(hi),
                   std::to_string(cfg.replicas)});

    const double target = pspec.epsilon * pspec.epsilon * pspec.m2();
    nlohmann::json r;
    r["epsilon"] = pspec.epsilon;
    r["target_eps2_m2"] = target;
    r["eps_u"] = epsilon_target(cfg.model, u, pspec);
    r["eps_hat_mean"] = mean;
    r["covered"] = (lo <= target && target <= hi);
    rows.push_back(r);
  }

  nlohmann::json extra;
  extra["sigma2_eps_u"] = sigma2;
  extra["rows"] = rows;
  return finalize(cfg, dir, "inference.csv", table, extra,
                  wall_seconds_since(start));
}

ExperimentResult run_clt_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto dir = prepare_out_dir(cfg);
  const double u = cfg.levels.front();
  const std::vector<double> one_level = {u};
  const double v_u = variance_v(cfg.model, u);
  const double sd = std::sqrt(v_u);
  auto normal_cdf_vu = [sd](double y) { return gaussian_tail(-y / sd); };

  CsvTable table({"n", "epsilon", "n_replicas", "y_var", "v_u", "ks_distance"});
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < cfg.clt_sizes.size(); ++k) {
    const std::int64_t n = cfg.clt_sizes[k];
    GridSpec grid{n, n, cfg.grid.delta};
    PerturbationSpec pspec = cfg.pspec;
    pspec.epsilon = cfg.clt_epsilons[k];
    const EmbeddingPlan plan = plan_embedding(cfg.model, grid, cfg.clip_tol);
    const std::string name = "clt:" + std::to_string(k);
    const auto reps = run_replicas(plan, pspec, one_level, cfg.replicas,
                                   cfg.master_seed, name, cfg.threads);
    const double mean_area = exact_mean_area_fraction(cfg.model, u, pspec);
    const double root_area = std::sqrt(grid.area());
    std::vector<double> ys(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i)
      ys[i] = root_area * (reps[i].c2_over_t[0] - mean_area);
    const double y_var = sample_variance(ys);
    const double ks = ks_statistic_one_sample(ys, normal_cdf_vu);
    table.add_row({std::to_string(n), format_double(pspec.epsilon),
                   std::to_string(cfg.replicas), format_double(y_var),
                   format_double(v_u), format_double(ks)});
    nlohmann::json r;
    r["n"] = n;
    r["epsilon"] = pspec.epsilon;
    r["y_var"] = y_var;
    r["ks_distance"] = ks;
    rows.push_back(r);
  }

  nlohmann::json extra;
  extra["v_u"] = v_u;
  extra["rows"] = rows;
  return finalize(cfg, dir, "clt.csv", table, extra, wall_seconds_since(start));
}

}  // namespace excur
