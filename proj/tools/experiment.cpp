#include "experiment.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "adaptsc/analytic_ode.hpp"

namespace adaptsc::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem", {"type", "grid", "wind", "sigma", "epsilon", "tau", "kl_dim", "kl_variance", "kl_length", "kl_grid"}},
      {"ode", {"epsilon", "u0", "final_time", "times", "horizon", "tolerance", "fixed_step"}},
      {"adaptive",
       {"tolerance", "safety", "theta", "sync_step", "grow", "shrink", "initial_step", "final_time", "ge_mode", "init",
        "coarse_tolerance", "max_level"}},
      {"reference", {"degree", "tolerance", "times"}},
      {"cost", {"naive_degree"}},
      {"output", {"directory", "seed"}},
  };
  return keys;
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& errors) : tree_(tree), errors_(errors) {}

  void get(const std::string& section, const std::string& key, double& out) {
    const auto raw = raw_value(section, key);
    if (!raw) return;
    const char* begin = raw->c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (raw->empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
      errors_.push_back(section + "." + key + ": expected a finite number, got '" + *raw + "'");
      return;
    }
    out = v;
  }

  template <class Int>
  void get_integer(const std::string& section, const std::string& key, Int& out) {
    const auto raw = raw_value(section, key);
    if (!raw) return;
    Int v{};
    const auto [ptr, ec] = std::from_chars(raw->data(), raw->data() + raw->size(), v);
    if (raw->empty() || ec != std::errc() || ptr != raw->data() + raw->size()) {
      errors_.push_back(section + "." + key + ": expected an integer, got '" + *raw + "'");
      return;
    }
    out = v;
  }

  void get(const std::string& section, const std::string& key, std::string& out) {
    if (const auto raw = raw_value(section, key)) out = *raw;
  }

 private:
  std::optional<std::string> raw_value(const std::string& section, const std::string& key) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!v) return std::nullopt;
    std::string s = *v;
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    return first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
  }

  const pt::ptree& tree_;
  std::vector<std::string>& errors_;
};

void check_structure(const pt::ptree& tree, std::vector<std::string>& errors) {
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (body.empty()) {
      errors.push_back(section + ": key outside of any section");
      continue;
    }
    if (it == schema().end()) {
      errors.push_back(section + ": unknown section");
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!it->second.count(key)) errors.push_back(section + "." + key + ": unknown key");
    }
  }
}

ExperimentConfig build(const pt::ptree& tree) {
  std::vector<std::string> errors;
  check_structure(tree, errors);
  Reader r(tree, errors);
  ExperimentConfig c;

  auto& p = c.problem;
  r.get("problem", "type", p.type);
  r.get_integer("problem", "grid", p.grid);
  r.get("problem", "wind", p.wind);
  r.get("problem", "sigma", p.sigma);
  r.get("problem", "epsilon", p.epsilon);
  r.get("problem", "tau", p.tau);
  r.get_integer("problem", "kl_dim", p.kl.dim);
  r.get("problem", "kl_variance", p.kl.sigma0_sq);
  r.get("problem", "kl_length", p.kl.corr_length);
  r.get_integer("problem", "kl_grid", p.kl.n_grid);
  if (p.type != "fem" && p.type != "ode") errors.push_back("problem.type: must be 'fem' or 'ode'");
  if (p.grid < 1 || p.grid > 8) errors.push_back("problem.grid: must lie in [1, 8]");
  if (p.wind != "four_quadrant" && p.wind != "kl") errors.push_back("problem.wind: must be 'four_quadrant' or 'kl'");
  if (!(p.sigma >= 0.0)) errors.push_back("problem.sigma: must be nonnegative");
  if (!(p.epsilon > 0.0)) errors.push_back("problem.epsilon: must be positive");
  if (!(p.tau > 0.0)) errors.push_back("problem.tau: must be positive");
  if (p.kl.n_grid < 2) errors.push_back("problem.kl_grid: must be at least 2");
  if (p.kl.dim < 1 || p.kl.dim > static_cast<std::size_t>(std::max(p.kl.n_grid, 1)) * std::max(p.kl.n_grid, 1)) {
    errors.push_back("problem.kl_dim: must lie in [1, kl_grid^2]");
  }
  if (!(p.kl.sigma0_sq > 0.0)) errors.push_back("problem.kl_variance: must be positive");
  if (!(p.kl.corr_length > 0.0)) errors.push_back("problem.kl_length: must be positive");

  auto& o = c.ode;
  r.get("ode", "epsilon", o.epsilon);
  r.get("ode", "u0", o.u0);
  r.get("ode", "final_time", o.final_time);
  r.get_integer("ode", "times", o.times);
  r.get("ode", "horizon", o.horizon);
  r.get("ode", "tolerance", o.tolerance);
  r.get("ode", "fixed_step", o.fixed_step);
  if (!(o.epsilon >= 0.0)) errors.push_back("ode.epsilon: must be nonnegative");
  if (!(o.final_time > 0.1)) errors.push_back("ode.final_time: must exceed 0.1");
  if (o.times < 2) errors.push_back("ode.times: must be at least 2");
  if (!(o.horizon > 0.0)) errors.push_back("ode.horizon: must be positive");
  if (!(o.tolerance > 0.0)) errors.push_back("ode.tolerance: must be positive");
  if (!(o.fixed_step > 0.0)) errors.push_back("ode.fixed_step: must be positive");

  auto& a = c.adaptive;
  a.sync_step = p.tau * std::log(1.0 / 0.9);
  a.final_time = 100.0;
  r.get("adaptive", "tolerance", a.tolerance);
  r.get("adaptive", "safety", a.safety);
  r.get("adaptive", "theta", a.theta);
  r.get("adaptive", "sync_step", a.sync_step);
  r.get("adaptive", "grow", a.grow);
  r.get("adaptive", "shrink", a.shrink);
  r.get("adaptive", "initial_step", a.initial_step);
  r.get("adaptive", "final_time", a.final_time);
  r.get("adaptive", "coarse_tolerance", a.coarse_tolerance);
  r.get_integer("adaptive", "max_level", a.max_level);
  std::string ge = "per_point", init = "reintegrate";
  r.get("adaptive", "ge_mode", ge);
  r.get("adaptive", "init", init);
  if (ge == "per_point") {
    a.ge_mode = GlobalErrorMode::per_point;
  } else if (ge == "shared_at_mean") {
    a.ge_mode = GlobalErrorMode::shared_at_mean;
  } else {
    errors.push_back("adaptive.ge_mode: must be 'per_point' or 'shared_at_mean'");
  }
  if (init == "reintegrate") {
    a.init = RefinementInit::reintegrate;
  } else if (init == "interpolate") {
    a.init = RefinementInit::interpolate;
  } else {
    errors.push_back("adaptive.init: must be 'reintegrate' or 'interpolate'");
  }
  // AdaptiveConfig reports each violation starting with the field name, which is also the key.
  for (const auto& v : a.violations()) errors.push_back("adaptive." + v.substr(0, v.find(' ')) + ": " + v);

  if (tree.get_child_optional("reference")) {
    ReferenceConfig ref;
    r.get_integer("reference", "degree", ref.degree);
    r.get("reference", "tolerance", ref.tolerance);
    r.get_integer("reference", "times", ref.times);
    if (ref.degree < 0 || ref.degree > 7) errors.push_back("reference.degree: must lie in [0, 7]");
    if (!(ref.tolerance > 0.0)) errors.push_back("reference.tolerance: must be positive");
    if (ref.times < 2) errors.push_back("reference.times: must be at least 2");
    c.reference = ref;
  }

  r.get_integer("cost", "naive_degree", c.naive_degree);
  if (c.naive_degree < 0 || c.naive_degree > 7) errors.push_back("cost.naive_degree: must lie in [0, 7]");
  r.get("output", "directory", c.output_dir);
  r.get_integer("output", "seed", c.seed);

  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

// Fixed formatting keeps artifacts byte-identical across runs.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os_ << (i ? "," : "") << fields[i];
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

std::string marked_list(const std::vector<MultiIndex>& marked) {
  std::string s;
  for (std::size_t k = 0; k < marked.size(); ++k) {
    if (k) s += ';';
    for (std::size_t i = 0; i < marked[k].dim(); ++i) s += (i ? " " : "") + std::to_string(marked[k][i]);
  }
  return s;
}

std::filesystem::path prepare(const std::string& out) {
  std::filesystem::create_directories(out);
  return std::filesystem::path(out);
}

void report_warnings(const AdaptiveResult& r, std::ostream& log) {
  for (const auto& w : r.warnings) log << "warning: " << w << '\n';
}

void write_adaptive_artifacts(const ExperimentConfig& config, const AdaptiveResult& r, const std::filesystem::path& dir) {
  Csv est(dir / "estimates.csv",
          {"time[-]", "pi_I[L2rho(L2)]", "pi_I_delta[L2rho(L2)]", "pi_delta[L2rho(L2)]", "pi_total[L2rho(L2)]",
           "eta[L2rho(L2)]", "n_colloc[points]", "n_colloc_enhanced[points]"});
  for (const auto& e : r.reports) {
    est.row({num(e.time), num(e.interpolation), num(e.correction), num(e.timestepping), num(e.total), num(e.tolerance),
             std::to_string(e.n_colloc), std::to_string(e.n_colloc_enhanced)});
  }
  Csv ref(dir / "refinements.csv", {"time[-]", "marked[multi-indices]", "n_colloc[points]",
                                     "n_colloc_enhanced[points]", "pi_I[L2rho(L2)]", "eta[L2rho(L2)]"});
  for (const auto& e : r.refinements) {
    ref.row({num(e.time), marked_list(e.marked), std::to_string(e.n_colloc), std::to_string(e.n_colloc_enhanced),
             num(e.interpolation), num(e.tolerance)});
  }
  const std::size_t d = r.final_set.dim();
  const std::size_t naive_points = sparse_points(MultiIndexSet::total_degree(d, config.naive_degree)).size();
  Csv cost(dir / "cost.csv", {"time[-]", "approximation_steps[steps]", "estimator_steps[steps]", "total_steps[steps]",
                              "naive_smolyak_steps[steps]", "n_colloc[points]", "n_colloc_enhanced[points]"});
  for (const auto& c : r.cost) {
    cost.row({num(c.time), std::to_string(c.approximation_steps), std::to_string(c.estimator_steps),
              std::to_string(c.approximation_steps + c.estimator_steps),
              std::to_string(naive_points * c.mean_point_steps), std::to_string(c.n_colloc),
              std::to_string(c.n_colloc_enhanced)});
  }
  std::ofstream(dir / "final_set.txt") << serialize(r.final_set);
}

void write_adaptive_summary(std::ostream& s, const AdaptiveResult& r) {
  const auto& last = r.reports.back();
  s << "final_time " << num(r.final_time) << '\n'
    << "estimate_total " << num(last.total) << '\n'
    << "estimate_interpolation " << num(last.interpolation) << '\n'
    << "estimate_correction " << num(last.correction) << '\n'
    << "estimate_timestepping " << num(last.timestepping) << '\n'
    << "n_colloc " << last.n_colloc << '\n'
    << "n_colloc_enhanced " << last.n_colloc_enhanced << '\n'
    << "index_set_size " << r.final_set.size() << '\n'
    << "refinements " << r.refinements.size() << '\n'
    << "sync_windows " << r.windows.size() << '\n'
    << "approximation_steps " << r.total_approximation_steps() << '\n'
    << "estimator_steps " << r.total_estimator_steps() << '\n'
    << "warnings " << r.warnings.size() << '\n';
}

std::vector<double> reference_grid(const ExperimentConfig& config) {
  return reference_times(config.problem.tau, config.adaptive.final_time,
                         static_cast<std::size_t>(config.reference->times));
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string m = "invalid configuration:";
        for (const auto& v : violations) m += "\n  " + v;
        return m;
      }()),
      violations_(std::move(violations)) {}

ExperimentConfig parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }
  return build(tree);
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

void require_blocks(const ExperimentConfig& config, const std::string& subcommand) {
  if ((subcommand == "reference" || subcommand == "effectivity") && !config.reference) {
    throw ConfigError({"reference: section required by the '" + subcommand + "' subcommand"});
  }
}

std::unique_ptr<ParametricProblem> make_problem(const ExperimentConfig& config) {
  const auto& p = config.problem;
  if (p.type == "ode") return std::make_unique<ComplexOdeFamily>(ComplexOdeProblem{config.ode.epsilon, config.ode.u0});
  std::shared_ptr<const WindModel> wind;
  if (p.wind == "kl") {
    wind = make_kl_wind(p.kl);
  } else {
    wind = make_four_quadrant_wind(p.sigma);
  }
  return std::make_unique<FemProblem>(SpatialMesh(p.grid), std::move(wind), p.epsilon, HotWall{p.tau});
}

void run_ode_demo(const ExperimentConfig& config, const std::string& out, std::ostream&) {
  const auto dir = prepare(out);
  const auto& o = config.ode;
  const ComplexOdeProblem problem{o.epsilon, o.u0};
  const auto times = log_spaced(0.1, o.final_time, static_cast<std::size_t>(o.times));

  std::vector<std::vector<InterpolationErrorSample>> study;
  for (int k = 1; k <= 4; ++k) study.push_back(interp_error_study(problem, k, times));

  Csv stats(dir / "statistics.csv",
            {"time[-]", "mean_exact[-]", "stddev_exact[-]", "mean_k1[-]", "mean_k2[-]", "mean_k3[-]", "mean_k4[-]",
             "stddev_k1[-]", "stddev_k2[-]", "stddev_k3[-]", "stddev_k4[-]"});
  for (std::size_t j = 0; j < times.size(); ++j) {
    std::vector<std::string> row{num(times[j]), num(exact_mean(problem, times[j])), num(exact_stddev(problem, times[j]))};
    for (int k = 0; k < 4; ++k) row.push_back(num(study[k][j].mean));
    for (int k = 0; k < 4; ++k) row.push_back(num(study[k][j].stddev));
    stats.row(row);
  }
  Csv stat_err(dir / "statistics_errors.csv", {"time[-]", "k[level exponent]", "mean_error[-]", "stddev_error[-]"});
  Csv interp(dir / "interpolation_errors.csv", {"time[-]", "k[level exponent]", "l2_error[L2rho]"});
  for (int k = 0; k < 4; ++k) {
    for (const auto& s : study[k]) {
      stat_err.row({num(s.time), std::to_string(k + 1), num(s.mean_error), num(s.stddev_error)});
      interp.row({num(s.time), std::to_string(k + 1), num(s.l2_error)});
    }
  }

  Csv steps(dir / "timestepping.csv", {"method[-]", "y[-]", "time[-]", "step[-]", "global_error[abs]"});
  std::ofstream summary(dir / "summary.txt");
  for (const auto& [name, method, control] :
       {std::tuple{"tr", TimeMethod::tr, o.fixed_step}, std::tuple{"tr_ab2", TimeMethod::tr_ab2, o.tolerance}}) {
    for (double y : {0.0, 1.0}) {
      const auto s = timestepping_study(problem, y, method, control, o.horizon);
      for (std::size_t j = 0; j < s.times.size(); ++j) {
        steps.row({name, num(y), num(s.times[j]), num(s.steps[j]), num(s.global_errors[j])});
      }
      summary << name << "_y" << num(y) << "_steps " << s.step_count << '\n';
    }
  }
  for (int k = 0; k < 4; ++k) {
    double worst = 0.0;
    for (const auto& s : study[k]) worst = std::max(worst, s.l2_error);
    summary << "max_l2_error_k" << k + 1 << ' ' << num(worst) << '\n';
  }
}

void run_adaptive_command(const ExperimentConfig& config, const std::string& out, std::ostream& log) {
  const auto dir = prepare(out);
  const auto problem = make_problem(config);
  const auto r = run_adaptive(*problem, config.adaptive);
  report_warnings(r, log);
  write_adaptive_artifacts(config, r, dir);
  std::ofstream summary(dir / "summary.txt");
  write_adaptive_summary(summary, r);
}

void run_reference_command(const ExperimentConfig& config, const std::string& out, std::ostream&) {
  require_blocks(config, "reference");
  const auto dir = prepare(out);
  const auto problem = make_problem(config);
  const auto times = reference_grid(config);
  const auto set = MultiIndexSet::total_degree(problem->parameter_dim(), config.reference->degree);
  const auto ref = run_reference(*problem, set, config.reference->tolerance, times, config.adaptive.initial_step,
                                 config.adaptive.threads);
  const SparseMatrix* mass = problem->norm_matrix();
  Csv csv(dir / "reference.csv", {"time[-]", "norm[L2rho(L2)]", "mean_norm[L2]", "stddev_norm[L2]"});
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto e = ref.interpolant(k).expansion();
    const Eigen::VectorXd m = e.mean();
    const double mean_norm = std::sqrt(mass ? m.dot(*mass * m) : m.squaredNorm());
    const double total = std::sqrt(e.squared_norm(mass));
    csv.row({num(times[k]), num(total), num(mean_norm), num(std::sqrt(std::max(0.0, total * total - mean_norm * mean_norm)))});
  }
  std::ofstream(dir / "reference_set.txt") << serialize(set);
  std::ofstream summary(dir / "summary.txt");
  summary << "n_colloc " << sparse_points(set).size() << '\n'
          << "index_set_size " << set.size() << '\n'
          << "tolerance " << num(config.reference->tolerance) << '\n'
          << "reference_times " << times.size() << '\n'
          << "total_steps " << ref.total_steps << '\n';
}

void run_effectivity_command(const ExperimentConfig& config, const std::string& out, std::ostream& log) {
  require_blocks(config, "effectivity");
  const auto dir = prepare(out);
  const auto problem = make_problem(config);
  const auto times = reference_grid(config);
  AdaptiveConfig ac = config.adaptive;
  ac.report_times = times;
  const auto r = run_adaptive(*problem, ac);
  report_warnings(r, log);
  const auto set = MultiIndexSet::total_degree(problem->parameter_dim(), config.reference->degree);
  const auto ref = run_reference(*problem, set, config.reference->tolerance, times, ac.initial_step, ac.threads);
  const auto eff = effectivity(*problem, r, ref);

  write_adaptive_artifacts(config, r, dir);
  Csv csv(dir / "errors.csv", {"time[-]", "error[L2rho(L2)]", "estimate[L2rho(L2)]", "effectivity[ratio]",
                               "pi_I[L2rho(L2)]", "pi_I_delta[L2rho(L2)]", "pi_delta[L2rho(L2)]"});
  std::size_t within = 0;
  for (std::size_t k = 0; k < eff.size(); ++k) {
    const auto& rep = r.report_estimates[k];
    csv.row({num(eff[k].time), num(eff[k].error), num(eff[k].estimate), num(eff[k].effectivity),
             num(rep.interpolation), num(rep.correction), num(rep.timestepping)});
    if (eff[k].effectivity >= 0.1 && eff[k].effectivity <= 10.0) ++within;
  }
  std::ofstream summary(dir / "summary.txt");
  write_adaptive_summary(summary, r);
  summary << "final_error " << num(eff.back().error) << '\n'
          << "final_effectivity " << num(eff.back().effectivity) << '\n'
          << "effectivity_within_10x " << within << '/' << eff.size() << '\n'
          << "reference_n_colloc " << sparse_points(set).size() << '\n'
          << "reference_steps " << ref.total_steps << '\n';
}

}  // namespace adaptsc::cli
