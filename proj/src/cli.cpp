#include "pathsmooth/cli.hpp"

#include "pathsmooth/dataset.hpp"
#include "pathsmooth/model_select.hpp"
#include "pathsmooth/models.hpp"
#include "pathsmooth/oracle.hpp"
#include "pathsmooth/stats.hpp"
#include "pathsmooth/validation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace pathsmooth {

namespace {

using json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::string model = "ou";
  std::vector<double> theta;
  std::optional<double> obs_noise;
  std::optional<double> x0;
  double jump_rate = 0.0;
  double jump_size = 0.5;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string data;
  std::optional<double> delta;
};

struct SmootherOpts {
  int particles = 100;
  int grid = 10;
  std::string construct;
  std::string grad = "fd";
  std::string resample = "multinomial";
  std::optional<double> ess;
  int workers = 1;
  std::string scheme = "euler_ratio";
  std::vector<int> mask;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + cell + "' is not a number");
    }
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

ModelOptions model_options(const Common& c) {
  ModelOptions o;
  o.jump_rate = c.jump_rate;
  o.jump_halfwidth = c.jump_size;
  o.obs_sd = c.obs_noise;
  o.x0 = c.x0;
  return o;
}

Vector parse_theta(const SdeModel& model, const std::vector<double>& values, const std::string& flag) {
  if (values.empty()) throw ConfigError(flag + " is required for model " + model.name());
  const Vector theta = to_vector(values);
  if (theta.size() != model.dim_theta()) {
    std::string names;
    for (const auto& n : model.info().param_names) names += (names.empty() ? "" : ",") + n;
    throw ConfigError(flag + " has " + std::to_string(theta.size()) + " values; model " + model.name() +
                      " expects " + std::to_string(model.dim_theta()) + " (" + names + ")");
  }
  check_parameters(model, theta);
  return theta;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PATHSMOOTH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("PATHSMOOTH_SEED is not an unsigned integer: ") + env);
    }
  }
  return fallback;
}

Construct parse_construct(const std::string& s, const SdeModel& model) {
  if (s.empty()) return model.has_jumps() ? Construct::two : Construct::continuous;
  if (s == "continuous") return Construct::continuous;
  if (s == "one") return Construct::one;
  if (s == "two") return Construct::two;
  throw ConfigError("unknown construct '" + s + "'");
}

const char* construct_name(Construct c) {
  switch (c) {
    case Construct::continuous: return "continuous";
    case Construct::one: return "one";
    case Construct::two: return "two";
  }
  return "?";
}

SmootherConfig smoother_config(const SmootherOpts& s, std::uint64_t seed) {
  SmootherConfig cfg;
  cfg.particles = s.particles;
  cfg.workers = s.workers;
  cfg.seed = seed;
  cfg.ess_threshold = s.ess;
  if (s.resample == "multinomial") cfg.resample = ResampleScheme::multinomial;
  else if (s.resample == "systematic") cfg.resample = ResampleScheme::systematic;
  else if (s.resample == "stratified") cfg.resample = ResampleScheme::stratified;
  else throw ConfigError("unknown resampling scheme '" + s.resample + "'");
  if (s.ess && (*s.ess <= 0.0 || *s.ess > 1.0)) throw ConfigError("--ess must lie in (0, 1]");
  if (s.particles < 1) throw ConfigError("--N must be positive");
  if (s.grid < 1) throw ConfigError("--M must be positive");
  return cfg;
}

GradSpec grad_spec(const SmootherOpts& s) {
  GradSpec g;
  if (s.grad == "fd") g.mode = GradSpec::Mode::finite_difference;
  else if (s.grad == "analytic") g.mode = GradSpec::Mode::analytic;
  else throw ConfigError("unknown gradient mode '" + s.grad + "'");
  g.mask = s.mask;
  return g;
}

DensityScheme density_scheme(const std::string& s) {
  if (s == "euler_ratio") return DensityScheme::euler_ratio;
  if (s == "girsanov") return DensityScheme::girsanov;
  throw ConfigError("unknown density scheme '" + s + "'");
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << std::setprecision(17);
  return f;
}

void write_manifest(const std::string& out, json manifest) {
  if (out.empty()) return;
  manifest["version"] = kVersion;
  manifest["output"] = out;
  std::ofstream f(out + ".json");
  if (!f) throw ConfigError("cannot write '" + out + ".json'");
  f << manifest.dump(2) << "\n";
}

json common_json(const Common& c, std::uint64_t seed) {
  json j;
  j["model"] = c.model;
  j["seed"] = seed;
  if (!c.theta.empty()) j["theta"] = c.theta;
  if (c.obs_noise) j["obs_noise"] = *c.obs_noise;
  if (c.x0) j["x0"] = *c.x0;
  j["jump_rate"] = c.jump_rate;
  j["jump_size"] = c.jump_size;
  if (!c.data.empty()) j["data"] = c.data;
  if (c.delta) j["delta"] = *c.delta;
  return j;
}

json smoother_json(const SmootherOpts& s, Construct construct) {
  json j;
  j["N"] = s.particles;
  j["M"] = s.grid;
  j["construct"] = construct_name(construct);
  j["grad"] = s.grad;
  j["resample"] = s.resample;
  if (s.ess) j["ess"] = *s.ess;
  j["workers"] = s.workers;
  j["scheme"] = s.scheme;
  j["mask"] = s.mask;
  return j;
}

void add_common(CLI::App* app, Common& c, bool with_data) {
  app->add_option("--model", c.model, "built-in model: ou, periodic, heston, m1, m2, m3")->capture_default_str();
  app->add_option("--obs-noise", c.obs_noise, "observation noise sd (endpoint-observed models)");
  app->add_option("--x0", c.x0, "initial state");
  app->add_option("--jump-rate", c.jump_rate, "O-U compound Poisson rate lambda")->capture_default_str();
  app->add_option("--jump-size", c.jump_size, "O-U jump sizes are U(-zeta, zeta)")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed (falls back to PATHSMOOTH_SEED)");
  app->add_option("--out", c.out, "output CSV; a JSON manifest is written next to it");
  if (with_data) {
    app->add_option("--data", c.data, "dataset CSV")->required();
    app->add_option("--delta", c.delta, "observation spacing (default: from the time column, else 1)");
  }
}

void add_smoother(CLI::App* app, SmootherOpts& s) {
  app->add_option("--N", s.particles, "particles")->capture_default_str();
  app->add_option("--M", s.grid, "Euler steps per observation interval")->capture_default_str();
  app->add_option("--construct", s.construct, "continuous | one | two (default: two with jumps)")
      ->check(CLI::IsMember({"continuous", "one", "two"}));
  app->add_option("--grad", s.grad, "fd | analytic")->check(CLI::IsMember({"fd", "analytic"}))->capture_default_str();
  app->add_option("--resample", s.resample, "multinomial | systematic | stratified")
      ->check(CLI::IsMember({"multinomial", "systematic", "stratified"}))
      ->capture_default_str();
  app->add_option("--ess", s.ess, "resample only when ESS < ess * N");
  app->add_option("--workers", s.workers, "threads for the particle loops")->capture_default_str();
  app->add_option("--scheme", s.scheme, "euler_ratio | girsanov")
      ->check(CLI::IsMember({"euler_ratio", "girsanov"}))
      ->capture_default_str();
  app->add_option("--mask", s.mask, "score coordinates to differentiate (0-based; default all)")->delimiter(',');
}

std::ostream& out_stream(const std::string& path, std::ofstream& file) {
  if (path.empty()) {
    std::cout << std::setprecision(17);
    return std::cout;
  }
  file = open_output(path);
  return file;
}

// ---------------------------------------------------------------------------

struct SimulateOpts {
  Common c;
  int n = 100;
  double delta = 1.0;
  int fine = 1000;
  bool latent = false;
};

int cmd_simulate(const SimulateOpts& o) {
  if (o.c.out.empty()) throw ConfigError("simulate needs --out");
  ModelPtr model = make_model(o.c.model, model_options(o.c));
  const Vector theta = parse_theta(*model, o.c.theta, "--theta");
  const std::uint64_t seed = resolve_seed(o.c.seed, 1);
  if (!(o.delta > 0.0)) throw ConfigError("--delta must be positive");
  Rng rng = make_stream(seed, {0});
  const Dataset data = simulate_dataset(*model, theta, o.n, o.delta, o.fine, rng);
  write_dataset(o.c.out, data, o.latent);

  json m = common_json(o.c, seed);
  m["command"] = "simulate";
  m["n"] = o.n;
  m["delta"] = o.delta;
  m["M_dagger"] = o.fine;
  m["latent"] = o.latent;
  write_manifest(o.c.out, m);
  std::cerr << "wrote " << data.size() << " observations to " << o.c.out << "\n";
  return kExitOk;
}

struct ScoreOpts {
  Common c;
  SmootherOpts s;
  int replicates = 1;
  bool oracle = false;
};

int cmd_score(const ScoreOpts& o) {
  ModelPtr model = make_model(o.c.model, model_options(o.c));
  const Vector theta = parse_theta(*model, o.c.theta, "--theta");
  const std::uint64_t seed = resolve_seed(o.c.seed, 1);
  const Dataset data = read_dataset(o.c.data);
  const double dt = o.c.delta.value_or(data.spacing(1.0));
  const Construct construct = parse_construct(o.s.construct, *model);
  if (o.replicates < 1) throw ConfigError("--R must be positive");

  PathspaceDynamics dyn(model, construct, o.s.grid, density_scheme(o.s.scheme));
  auto fn = make_score_functional(dyn, grad_spec(o.s));
  std::vector<Vector> est;
  std::vector<double> logliks;
  for (int r = 0; r < o.replicates; ++r) {
    const SmootherConfig cfg = smoother_config(o.s, replicate_seed(seed, 0, static_cast<std::uint64_t>(r)));
    const SmootherRun run = run_smoother(dyn, *fn, theta, data.ys, dt, cfg);
    est.push_back(run.final_state.estimate);
    logliks.push_back(run.final_state.loglik);
  }

  const auto& names = model->info().param_names;
  std::ofstream file;
  std::ostream& os = out_stream(o.c.out, file);
  os << "replicate";
  for (const auto& n : names) os << ",score_" << n;
  os << ",loglik\n";
  for (int r = 0; r < o.replicates; ++r) {
    os << r;
    for (int i = 0; i < est[r].size(); ++i) os << "," << est[r](i);
    os << "," << logliks[r] << "\n";
  }

  json summary = json::object();
  std::cerr << std::setprecision(6);
  for (int i = 0; i < model->dim_theta(); ++i) {
    std::vector<double> v;
    for (const auto& e : est) v.push_back(e(i));
    json q;
    q["mean"] = mean(v);
    q["min"] = quantile(v, 0.0);
    q["q25"] = quantile(v, 0.25);
    q["median"] = median(v);
    q["q75"] = quantile(v, 0.75);
    q["max"] = quantile(v, 1.0);
    if (v.size() > 1) q["se"] = standard_error(v);
    summary[names[i]] = q;
    std::cerr << names[i] << ": mean " << mean(v) << " median " << median(v) << " IQR [" << quantile(v, 0.25)
              << ", " << quantile(v, 0.75) << "]\n";
  }

  json m = common_json(o.c, seed);
  m["command"] = "score";
  m["R"] = o.replicates;
  m["smoother"] = smoother_json(o.s, construct);
  m["summary"] = summary;
  if (o.oracle) {
    if (model->name() != "ou" || model->has_jumps()) throw ConfigError("--oracle needs the O-U model without jumps");
    const auto* ou = dynamic_cast<const OrnsteinUhlenbeckModel*>(model.get());
    Rng unused;
    const double x0 = model->sample_initial(theta, unused)(0);
    const auto euler = kalman_loglik_and_score(ou_linear_gaussian(dt, ou->obs_sd(), x0, o.s.grid), theta, data.ys);
    const auto exact = kalman_loglik_and_score(ou_linear_gaussian(dt, ou->obs_sd(), x0, 0), theta, data.ys);
    m["oracle"] = {{"euler_grid_score", std::vector<double>(euler.score.data(), euler.score.data() + euler.score.size())},
                   {"euler_grid_loglik", euler.loglik},
                   {"continuous_score", std::vector<double>(exact.score.data(), exact.score.data() + exact.score.size())},
                   {"continuous_loglik", exact.loglik}};
    std::cerr << "Kalman score (Euler M=" << o.s.grid << "): " << euler.score.transpose()
              << "\nKalman score (continuous time): " << exact.score.transpose() << "\n";
  }
  write_manifest(o.c.out, m);
  return kExitOk;
}

struct FitOpts {
  Common c;
  SmootherOpts s;
  std::vector<double> theta0;
  std::string optimizer = "adam";
  double alpha = 0.001;
  double gamma0 = 0.01;
};

FitConfig fit_config(const FitOpts& o, const SdeModel& model, std::uint64_t seed, double dt) {
  FitConfig fit;
  fit.smoother = smoother_config(o.s, seed);
  fit.construct = parse_construct(o.s.construct, model);
  fit.grid = o.s.grid;
  fit.dt = dt;
  fit.scheme = density_scheme(o.s.scheme);
  fit.grad = grad_spec(o.s);
  if (o.optimizer == "adam") fit.optimizer = FitConfig::Optimizer::adam;
  else if (o.optimizer == "rm") fit.optimizer = FitConfig::Optimizer::robbins_monro;
  else throw ConfigError("unknown optimizer '" + o.optimizer + "'");
  fit.adam.alpha = o.alpha;
  fit.gamma0 = o.gamma0;
  return fit;
}

int cmd_fit(const FitOpts& o) {
  ModelPtr model = make_model(o.c.model, model_options(o.c));
  const Vector theta0 = parse_theta(*model, o.theta0, "--theta0");
  const std::uint64_t seed = resolve_seed(o.c.seed, 1);
  const Dataset data = read_dataset(o.c.data);
  const double dt = o.c.delta.value_or(data.spacing(1.0));
  const FitConfig cfg = fit_config(o, *model, seed, dt);
  const FitResult fit = online_gradient_ascent(model, data.ys, theta0, cfg);
  for (const auto& w : fit.warnings) std::cerr << "warning: " << w << "\n";

  std::ofstream file;
  std::ostream& os = out_stream(o.c.out, file);
  const bool dates = !data.dates.empty();
  os << "n";
  if (dates) os << ",date";
  for (const auto& n : model->info().param_names) os << "," << n;
  os << ",loglik_increment\n";
  for (std::size_t k = 0; k < fit.trajectory.size(); ++k) {
    os << k;
    if (dates) os << "," << (k > 0 ? data.dates[k - 1] : "");
    for (int i = 0; i < fit.trajectory[k].size(); ++i) os << "," << fit.trajectory[k](i);
    os << ",";
    if (k > 0) os << fit.increments[k - 1];
    os << "\n";
  }

  json m = common_json(o.c, seed);
  m["command"] = "fit";
  m["theta0"] = o.theta0;
  m["optimizer"] = o.optimizer;
  m["alpha"] = o.alpha;
  m["gamma0"] = o.gamma0;
  m["smoother"] = smoother_json(o.s, cfg.construct);
  const Vector& last = fit.trajectory.back();
  m["final_theta"] = std::vector<double>(last.data(), last.data() + last.size());
  m["loglik"] = fit.loglik;
  m["warnings"] = fit.warnings;
  write_manifest(o.c.out, m);
  std::cerr << "final theta: " << last.transpose() << "\n";
  return kExitOk;
}

struct SelectOpts {
  FitOpts f;
  std::vector<std::string> models{"m1", "m2", "m3"};
  std::vector<std::string> starts;
};

Vector default_start(const SdeModel& model) {
  const std::string& n = model.name();
  if (n == "ou") return (Vector(3) << 0.5, 0.0, 0.5).finished();
  if (n == "periodic") return (Vector(2) << 0.1, 1.0).finished();
  if (n == "heston") return (Vector(4) << 0.5, 0.5, 0.2, 0.1).finished();
  Vector th = Vector::Constant(model.dim_theta(), 0.01);
  th(1) = -0.01;
  th(th.size() - 1) = 0.1;
  return th;
}

int cmd_select(const SelectOpts& o) {
  const Dataset data = read_dataset(o.f.c.data);
  if (data.size() == 0) throw ConfigError("select needs at least one observation");
  const double dt = o.f.c.delta.value_or(data.spacing(1.0));
  const std::uint64_t seed = resolve_seed(o.f.c.seed, 1);
  if (o.models.empty()) throw ConfigError("--models is empty");

  std::map<std::string, std::string> starts;
  for (const auto& s : o.starts) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--theta0 entries look like model=v1,v2,...: '" + s + "'");
    starts[s.substr(0, eq)] = s.substr(eq + 1);
  }

  std::vector<BicTrack> tracks;
  std::vector<std::string> labels;
  json fits = json::array();
  for (std::size_t t = 0; t < o.models.size(); ++t) {
    ModelOptions mo = model_options(o.f.c);
    // the latent short rate starts at the first observed value
    if (!mo.x0) mo.x0 = data.ys[0](0);
    ModelPtr model = make_model(o.models[t], mo);
    const Vector theta0 = starts.count(o.models[t])
                              ? parse_theta(*model, parse_numbers(starts[o.models[t]], "--theta0"), "--theta0")
                                                    : default_start(*model);
    FitConfig cfg = fit_config(o.f, *model, replicate_seed(seed, 1, t), dt);
    std::string label = o.models[t];
    for (const auto& l : labels)
      if (l == label) label = o.models[t] + "#" + std::to_string(t + 1);
    labels.push_back(label);
    const FitResult fit = online_gradient_ascent(model, data.ys, theta0, cfg);
    for (const auto& w : fit.warnings) std::cerr << label << " warning: " << w << "\n";
    tracks.push_back(BicTrack::from_fit(label, model->dim_theta(), fit));
    const Vector& last = fit.trajectory.back();
    fits.push_back({{"model", label},
                    {"theta0", std::vector<double>(theta0.data(), theta0.data() + theta0.size())},
                    {"final_theta", std::vector<double>(last.data(), last.data() + last.size())},
                    {"loglik", fit.loglik}});
  }

  std::vector<std::vector<double>> bics;
  for (const auto& t : tracks) bics.push_back(bic_path(t));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t b = 0; b < tracks.size(); ++b)
    for (std::size_t a = b + 1; a < tracks.size(); ++a) pairs.emplace_back(a, b);
  std::vector<std::vector<double>> diffs;
  for (auto [a, b] : pairs) diffs.push_back(bic_difference(tracks[a], tracks[b]));

  std::ofstream file;
  std::ostream& os = out_stream(o.f.c.out, file);
  const bool dates = !data.dates.empty();
  os << "n";
  if (dates) os << ",date";
  for (const auto& l : labels) os << ",loglik_" << l;
  for (const auto& l : labels) os << ",bic_" << l;
  for (auto [a, b] : pairs) os << ",bic_" << labels[a] << "-" << labels[b];
  os << "\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    os << k + 1;
    if (dates) os << "," << data.dates[k];
    for (const auto& t : tracks) os << "," << t.loglik[k];
    for (const auto& b : bics) os << "," << b[k];
    for (const auto& d : diffs) os << "," << d[k];
    os << "\n";
  }

  json m = common_json(o.f.c, seed);
  m["command"] = "select";
  m["models"] = o.models;
  m["fits"] = fits;
  m["smoother"] = smoother_json(o.f.s, Construct::continuous);
  m["optimizer"] = o.f.optimizer;
  m["alpha"] = o.f.alpha;
  write_manifest(o.f.c.out, m);
  return kExitOk;
}

struct ValidateOpts {
  std::vector<int> criteria{3, 4, 2, 1};
  std::optional<std::uint64_t> seed;
  bool corrupt = false;
  double tolerance_scale = 1.0;
  std::string out;
};

int cmd_validate(const ValidateOpts& o) {
  const double scale = o.corrupt ? 0.0 : o.tolerance_scale;
  std::optional<std::uint64_t> seed = o.seed;
  if (!seed && std::getenv("PATHSMOOTH_SEED")) seed = resolve_seed(std::nullopt, 0);
  auto prep = [&](auto cfg) {
    if (seed) cfg.seed = *seed;
    cfg.tolerance_scale = scale;
    return cfg;
  };
  json report = json::array();
  bool all = true;
  for (int c : o.criteria) {
    CheckResult r;
    switch (c) {
      case 1: r = check_mesh_robustness(prep(MeshRobustnessConfig{})); break;
      case 2: r = check_score_vs_kalman(prep(ScoreOracleConfig{})); break;
      case 3: r = check_bridge_unbiasedness(prep(BridgeUnbiasednessConfig{})); break;
      case 4: r = check_round_trip(prep(RoundTripConfig{})); break;
      case 5: r = check_construct_equivalence(prep(ConstructEquivalenceConfig{})); break;
      case 6: r = check_parameter_recovery(prep(RecoveryConfig{})); break;
      case 7: r = check_mesh_free_fit(prep(MeshFreeFitConfig{})); break;
      case 8: r = check_n_consistency(prep(NConsistencyConfig{})); break;
      case 9: r = check_bic_null(prep(BicNullConfig{})); break;
      case 10: r = check_adam_and_gradients(prep(UnitSuiteConfig{})); break;
      default: throw ConfigError("no check numbered " + std::to_string(c));
    }
    all = all && r.passed;
    std::cout << (r.passed ? "PASS " : "FAIL ") << c << " " << r.name << ": " << r.summary << " [" << std::fixed
              << std::setprecision(1) << r.seconds << "s]" << std::defaultfloat << std::endl;
    json m = json::object();
    for (const auto& [k, v] : r.metrics) m[k] = v;
    report.push_back({{"criterion", c}, {"name", r.name}, {"passed", r.passed}, {"summary", r.summary},
                      {"seconds", r.seconds}, {"metrics", m}});
  }
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw ConfigError("cannot write '" + o.out + "'");
    f << json{{"version", kVersion}, {"tolerance_scale", scale}, {"checks", report}}.dump(2) << "\n";
  }
  return all ? kExitOk : kExitValidation;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Online pathspace smoothing, score estimation and fitting for (jump) diffusions"};
  app.set_config("--config", "", "key=value file with a [section] per command");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a dataset from a built-in model");
  add_common(sim_cmd, sim.c, false);
  sim_cmd->add_option("--theta", sim.c.theta, "true parameter, comma separated")->delimiter(',')->required();
  sim_cmd->add_option("--n", sim.n, "observations")->capture_default_str();
  sim_cmd->add_option("--delta", sim.delta, "observation spacing")->capture_default_str();
  sim_cmd->add_option("--M", sim.fine, "Euler steps per interval for the latent path")->capture_default_str();
  sim_cmd->add_flag("--latent", sim.latent, "also write the latent state");

  ScoreOpts score;
  auto* score_cmd = app.add_subcommand("score", "R independent smoothed score estimates");
  add_common(score_cmd, score.c, true);
  add_smoother(score_cmd, score.s);
  score_cmd->add_option("--theta", score.c.theta, "evaluation point")->delimiter(',')->required();
  score_cmd->add_option("--R", score.replicates, "replicates")->capture_default_str();
  score_cmd->add_flag("--oracle", score.oracle, "attach the Kalman score (O-U only)");

  FitOpts fit;
  auto* fit_cmd = app.add_subcommand("fit", "online gradient ascent on the log-likelihood");
  add_common(fit_cmd, fit.c, true);
  add_smoother(fit_cmd, fit.s);
  fit_cmd->add_option("--theta0", fit.theta0, "initial parameter")->delimiter(',')->required();
  fit_cmd->add_option("--optimizer", fit.optimizer, "adam | rm")->check(CLI::IsMember({"adam", "rm"}))->capture_default_str();
  fit_cmd->add_option("--alpha", fit.alpha, "ADAM step size")->capture_default_str();
  fit_cmd->add_option("--gamma0", fit.gamma0, "Robbins-Monro gain gamma0 n^-0.6")->capture_default_str();

  SelectOpts sel;
  auto* sel_cmd = app.add_subcommand("select", "online BIC tracks and differences");
  add_common(sel_cmd, sel.f.c, true);
  add_smoother(sel_cmd, sel.f.s);
  sel_cmd->add_option("--models", sel.models, "models to compare")->delimiter(',')->capture_default_str();
  sel_cmd->add_option("--theta0", sel.starts, "initial parameter per model: name=v1,v2,...");
  sel_cmd->add_option("--optimizer", sel.f.optimizer, "adam | rm")->check(CLI::IsMember({"adam", "rm"}))->capture_default_str();
  sel_cmd->add_option("--alpha", sel.f.alpha, "ADAM step size")->capture_default_str();
  sel_cmd->add_option("--gamma0", sel.f.gamma0, "Robbins-Monro gain")->capture_default_str();

  ValidateOpts val;
  auto* val_cmd = app.add_subcommand("validate", "run the oracle checks");
  val_cmd->add_option("--criteria", val.criteria, "check numbers 1-10")->delimiter(',')->capture_default_str();
  val_cmd->add_option("--seed", val.seed, "override every check's seed");
  val_cmd->add_flag("--corrupt-tolerance", val.corrupt, "zero every tolerance (all checks must fail)");
  val_cmd->add_option("--tolerance-scale", val.tolerance_scale, "multiply every tolerance")->capture_default_str();
  val_cmd->add_option("--out", val.out, "JSON report");

  // --config is an app-level option; accept it anywhere on the line
  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  for (std::size_t i = args.size(); i-- > 0;) {
    const bool joined = args[i].rfind("--config=", 0) == 0;
    if (args[i] == "--config" && i > 0) {
      const std::string v = args[i - 1];
      args.erase(args.begin() + static_cast<long>(i) - 1, args.begin() + static_cast<long>(i) + 1);
      args.push_back(v);
      args.push_back("--config");
      break;
    }
    if (joined) {
      const std::string v = args[i];
      args.erase(args.begin() + static_cast<long>(i));
      args.push_back(v);
      break;
    }
  }

  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim);
    if (*score_cmd) return cmd_score(score);
    if (*fit_cmd) return cmd_fit(fit);
    if (*sel_cmd) return cmd_select(sel);
    if (*val_cmd) return cmd_validate(val);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace pathsmooth
