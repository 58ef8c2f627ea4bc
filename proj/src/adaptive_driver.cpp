#include "adaptsc/adaptive_driver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

namespace adaptsc {

namespace {

constexpr int kMethodOrder = 2;

std::string describe_point(const std::vector<double>& y) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
  os << ')';
  return os.str();
}

// Runs f(0..n-1), possibly on several threads. The first failure in index order is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](std::size_t i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) guarded(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Linear interpolation of accepted steps onto requested sample times.
struct Sampler {
  const std::vector<double>* times = nullptr;
  std::size_t next = 0;
  std::vector<Eigen::VectorXd> values;

  void observe(const StepInfo& info) {
    if (!times) return;
    while (next < times->size() && (*times)[next] <= info.t) {
      const double s = (*times)[next];
      const double theta = info.t > info.t_previous ? (s - info.t_previous) / (info.t - info.t_previous) : 1.0;
      values.push_back(info.u_previous + std::clamp(theta, 0.0, 1.0) * (info.u - info.u_previous));
      ++next;
    }
  }
};

// Integrator state plus the last accepted step, which may extend past the last
// synchronization time and is needed to interpolate back onto it.
struct RunState {
  IntegratorState state;
  double segment_start = 0.0;
  Eigen::VectorXd segment_u;
  Eigen::VectorXd at_sync;  // value at the last accepted synchronization time
};

struct Run {
  std::unique_ptr<TrAb2> integrator;
  RunState current;
  RunState checkpoint;
  Sampler sampler;
  std::size_t steps = 0;  // accepted steps in the last advance

  void reset(const Eigen::VectorXd& u, double t) {
    current.state = make_state(u, t);
    current.segment_start = t;
    current.segment_u = u;
    current.at_sync = u;
  }
};

struct PointRun {
  GridPoint z;
  std::vector<double> y;
  LinearOde ode;
  Run fine;
  std::unique_ptr<Run> coarse;
  Trajectory history;
  std::size_t history_mark = 0;
};

void truncate(Trajectory& tr, std::size_t size) {
  tr.times.resize(size);
  tr.snapshots.resize(size);
  tr.steps.resize(size > 0 ? size - 1 : 0);
  tr.local_errors.resize(size > 0 ? size - 1 : 0);
}

class Driver {
 public:
  Driver(const ParametricProblem& problem, const AdaptiveConfig& config)
      : problem_(problem),
        config_(config),
        mass_(problem.norm_matrix()),
        d_(problem.parameter_dim()),
        set_(MultiIndexSet::root(d_)),
        enhanced_(d_),
        center_(center_point(d_)) {
    result_.config = config;
    coarse_tolerance_ = config.effective_coarse_tolerance();
  }

  AdaptiveResult run();

 private:
  MultiIndexSet capped_enhance(const MultiIndexSet& set);
  void create_point(const GridPoint& z);
  bool needs_coarse(const GridPoint& z) const {
    return config_.ge_mode == GlobalErrorMode::per_point || z == center_;
  }
  void advance_all(std::vector<PointRun*> runs, double t_end, const std::vector<double>* samples, bool record);
  void advance_run(PointRun& p, Run& r, double t_end, const std::vector<double>* samples, bool record_history);
  EstimatorReport estimate(double time, const PointValues& fine, const PointValues& coarse) const;
  PointValues fine_values() const;
  PointValues coarse_values() const;
  PointValues sampled(std::size_t k, bool coarse) const;
  void refine(const std::vector<MultiIndex>& marked, double t, const EstimatorReport& report);
  void warn(const std::string& message) { result_.warnings.push_back(message); }

  const ParametricProblem& problem_;
  AdaptiveConfig config_;
  const SparseMatrix* mass_;
  std::size_t d_;
  MultiIndexSet set_;
  MultiIndexSet enhanced_;
  EstimatorWeights weights_;
  GridPoint center_;
  double coarse_tolerance_;
  std::map<GridPoint, std::unique_ptr<PointRun>> points_;
  std::set<MultiIndex> capped_;
  std::size_t approximation_steps_ = 0;
  std::size_t estimator_steps_ = 0;
  AdaptiveResult result_;
};

MultiIndexSet Driver::capped_enhance(const MultiIndexSet& set) {
  MultiIndexSet out = set;
  for (const auto& mu : set.reduced_margin()) {
    bool within = true;
    for (std::size_t i = 0; i < mu.dim(); ++i) within = within && mu[i] <= config_.max_level;
    if (within) {
      out = out.with(mu);
    } else if (capped_.insert(mu).second) {
      warn("level cap " + std::to_string(config_.max_level) + " reached: index " + mu.to_string() +
           " is not considered for refinement");
    }
  }
  return out;
}

void Driver::create_point(const GridPoint& z) {
  auto p = std::make_unique<PointRun>();
  p->z = z;
  p->y = z.coordinates();
  p->ode = problem_.system(p->y);
  AdaptiveOptions fine_opts;
  fine_opts.tolerance = config_.tolerance;
  fine_opts.initial_step = config_.initial_step;
  p->fine.integrator = std::make_unique<TrAb2>(p->ode, fine_opts);
  if (needs_coarse(z)) {
    AdaptiveOptions coarse_opts = fine_opts;
    coarse_opts.tolerance = coarse_tolerance_;
    p->coarse = std::make_unique<Run>();
    p->coarse->integrator = std::make_unique<TrAb2>(p->ode, coarse_opts);
  }
  points_.emplace(z, std::move(p));
}

void Driver::advance_run(PointRun& p, Run& r, double t_end, const std::vector<double>* samples, bool record_history) {
  r.sampler = Sampler{samples, 0, {}};
  r.steps = 0;
  RunState& c = r.current;
  // Samples already passed by the previous overshooting step.
  r.sampler.observe(StepInfo{c.segment_start, c.state.time, c.segment_u, c.state.u, 0.0, 0.0});
  Trajectory* history = record_history ? &p.history : nullptr;
  try {
    r.integrator->advance(c.state, t_end, [&](const StepInfo& info) {
      ++r.steps;
      c.segment_start = info.t_previous;
      c.segment_u = info.u_previous;
      r.sampler.observe(info);
      if (history) {
        history->times.push_back(info.t);
        history->snapshots.push_back(info.u);
        history->steps.push_back(info.step);
        history->local_errors.push_back(info.local_error);
      }
    }, Landing::overshoot);
  } catch (const std::exception& e) {
    throw IntegrationFailure(p.y, c.state.time, e.what());
  }
  // Steps differ from window to window, so a kept factorization is rarely reused.
  r.integrator->release_workspace();
}

void Driver::advance_all(std::vector<PointRun*> runs, double t_end, const std::vector<double>* samples,
                         bool record) {
  parallel_for(runs.size(), config_.threads, [&](std::size_t i) {
    PointRun& p = *runs[i];
    advance_run(p, p.fine, t_end, samples, record && config_.record_history);
    if (p.coarse) advance_run(p, *p.coarse, t_end, samples, false);
  });
  for (PointRun* p : runs) {
    approximation_steps_ += p->fine.steps;
    if (p->coarse) estimator_steps_ += p->coarse->steps;
  }
}

PointValues Driver::fine_values() const {
  PointValues out;
  for (const auto& [z, p] : points_) out.emplace(z, p->fine.current.at_sync);
  return out;
}

PointValues Driver::coarse_values() const {
  PointValues out;
  for (const auto& [z, p] : points_) {
    if (p->coarse) out.emplace(z, p->coarse->current.at_sync);
  }
  return out;
}

PointValues Driver::sampled(std::size_t k, bool coarse) const {
  PointValues out;
  for (const auto& [z, p] : points_) {
    const Run* r = coarse ? p->coarse.get() : &p->fine;
    if (r) out.emplace(z, r->sampler.values.at(k));
  }
  return out;
}

EstimatorReport Driver::estimate(double time, const PointValues& fine, const PointValues& coarse) const {
  ErrorEstimates ge;
  if (config_.ge_mode == GlobalErrorMode::shared_at_mean) {
    const double shared = global_error_estimate(fine.at(center_), coarse.at(center_), config_.tolerance,
                                                coarse_tolerance_, kMethodOrder, mass_);
    for (const auto& [z, v] : fine) ge.emplace(z, shared);
  } else {
    for (const auto& [z, v] : fine) {
      ge.emplace(z, global_error_estimate(v, coarse.at(z), config_.tolerance, coarse_tolerance_, kMethodOrder, mass_));
    }
  }
  EstimatorReport r;
  r.time = time;
  r.interpolation = interpolation_estimate(fine, set_, enhanced_, mass_);
  r.correction = correction_estimate(ge, weights_);
  r.timestepping = timestepping_estimate(ge, weights_);
  r.total = total_estimate(r.interpolation, r.correction, r.timestepping);
  r.tolerance = config_.safety * std::max(r.correction, std::numeric_limits<double>::epsilon());
  r.n_colloc = weights_.timestepping.size();
  r.n_colloc_enhanced = weights_.correction.size();
  return r;
}

void Driver::refine(const std::vector<MultiIndex>& marked, double t, const EstimatorReport& report) {
  MultiIndexSet grown = set_;
  for (const auto& mu : marked) grown = grown.with(mu);
  const MultiIndexSet grown_enhanced = capped_enhance(grown);

  std::vector<GridPoint> fresh;
  for (const auto& z : sparse_points(grown_enhanced)) {
    if (!points_.count(z)) fresh.push_back(z);
  }

  const bool interpolate = config_.init == RefinementInit::interpolate && t > 0.0;
  std::optional<SparseInterpolant> fine_interp, coarse_interp;
  if (interpolate) {
    // u_A at t from the enlarged set; its grid is already part of the enhanced grid.
    fine_interp.emplace(grown, fine_values(), t);
    if (config_.ge_mode == GlobalErrorMode::per_point) coarse_interp.emplace(grown, coarse_values(), t);
  }

  const Eigen::VectorXd u0 = problem_.initial_condition();
  std::vector<PointRun*> created;
  for (const auto& z : fresh) {
    create_point(z);
    PointRun& p = *points_.at(z);
    if (interpolate) {
      const Eigen::VectorXd u = fine_interp->evaluate(p.y);
      p.fine.reset(u, t);
      if (p.coarse) p.coarse->reset(coarse_interp ? coarse_interp->evaluate(p.y) : u, t);
      if (config_.record_history) {
        p.history.times.push_back(t);
        p.history.snapshots.push_back(u);
      }
    } else {
      p.fine.reset(u0, 0.0);
      if (p.coarse) p.coarse->reset(u0, 0.0);
      if (config_.record_history) {
        p.history.times.push_back(0.0);
        p.history.snapshots.push_back(u0);
      }
    }
    created.push_back(&p);
  }
  if (!interpolate && t > 0.0) {
    const std::vector<double> at_t{t};
    advance_all(created, t, &at_t, true);
    for (PointRun* p : created) {
      p->fine.current.at_sync = p->fine.sampler.values.at(0);
      if (p->coarse) p->coarse->current.at_sync = p->coarse->sampler.values.at(0);
    }
  }

  set_ = grown;
  enhanced_ = grown_enhanced;
  weights_ = estimator_weights(set_, enhanced_);

  RefinementEvent event;
  event.time = t;
  event.marked = marked;
  event.interpolation = report.interpolation;
  event.tolerance = report.tolerance;
  event.n_colloc = weights_.timestepping.size();
  event.n_colloc_enhanced = weights_.correction.size();
  result_.refinements.push_back(std::move(event));
}

AdaptiveResult Driver::run() {
  config_.validate();
  if (problem_.parameter_dim() == 0) throw std::invalid_argument("problem has no parameters");
  const double T = config_.final_time;
  const Eigen::VectorXd u0 = problem_.initial_condition();

  enhanced_ = capped_enhance(set_);
  weights_ = estimator_weights(set_, enhanced_);
  for (const auto& z : sparse_points(enhanced_)) {
    create_point(z);
    PointRun& p = *points_.at(z);
    p.fine.reset(u0, 0.0);
    if (p.coarse) p.coarse->reset(u0, 0.0);
    if (config_.record_history) {
      p.history.times.push_back(0.0);
      p.history.snapshots.push_back(u0);
    }
  }

  double t = 0.0;
  double dtau = config_.sync_step;
  std::size_t schedule_next = 0;
  const auto& report_times = config_.report_times;
  std::size_t report_next = 0;

  while (t < T) {
    double t_end;
    if (!config_.sync_schedule.empty()) {
      while (schedule_next < config_.sync_schedule.size() && config_.sync_schedule[schedule_next] <= t) ++schedule_next;
      t_end = schedule_next < config_.sync_schedule.size() ? std::min(config_.sync_schedule[schedule_next], T) : T;
    } else {
      t_end = t + dtau;
      if (t_end >= T || T - t_end < 1e-12 * T) t_end = T;
    }

    std::vector<double> samples;
    for (std::size_t k = report_next; k < report_times.size() && report_times[k] <= t_end; ++k) {
      samples.push_back(report_times[k]);
    }
    const std::size_t n_reports = samples.size();
    if (samples.empty() || samples.back() != t_end) samples.push_back(t_end);

    std::vector<PointRun*> all;
    for (auto& [z, p] : points_) {
      p->fine.checkpoint = p->fine.current;
      if (p->coarse) p->coarse->checkpoint = p->coarse->current;
      p->history_mark = p->history.times.size();
      all.push_back(p.get());
    }
    advance_all(all, t_end, &samples, true);

    const PointValues fine_end = sampled(samples.size() - 1, false);
    EstimatorReport report = estimate(t_end, fine_end, sampled(samples.size() - 1, true));
    bool accept = !(report.interpolation > report.tolerance);
    if (config_.progress) {
      char line[256];
      std::snprintf(line, sizeof line, "t=%.5g -> %.5g  pi_I=%.3e eta=%.3e pi=%.3e |X(I)|=%zu |X(I+)|=%zu %s", t, t_end,
                    report.interpolation, report.tolerance, report.total, report.n_colloc, report.n_colloc_enhanced,
                    accept ? "accept" : "reject");
      config_.progress(line);
    }
    std::map<MultiIndex, double> candidates;
    if (!accept) {
      for (const auto& nu : enhanced_) {
        if (!set_.contains(nu)) candidates.emplace(nu, indicator(fine_end, set_, nu, mass_));
      }
      report.indicators = candidates;
      if (candidates.empty()) {
        warn("estimate exceeds tolerance at t = " + std::to_string(t_end) +
             " but no index can be added below the level cap; window accepted");
        accept = true;
      }
    }

    if (!accept) {
      result_.windows.push_back({t, dtau, t_end, false});
      result_.rejected.push_back(report);
      for (auto& [z, p] : points_) {
        p->fine.current = p->fine.checkpoint;
        if (p->coarse) p->coarse->current = p->coarse->checkpoint;
        if (config_.record_history) truncate(p->history, p->history_mark);
      }
      refine(dorfler_mark(candidates, config_.theta), t, report);
      dtau *= config_.shrink;
      continue;
    }

    result_.windows.push_back({t, dtau, t_end, true});
    for (auto& [z, p] : points_) {
      p->fine.current.at_sync = p->fine.sampler.values.back();
      if (p->coarse) p->coarse->current.at_sync = p->coarse->sampler.values.back();
    }
    for (std::size_t k = 0; k < n_reports; ++k) {
      const PointValues fine = sampled(k, false);
      EstimatorReport at = estimate(samples[k], fine, sampled(k, true));
      result_.report_estimates.push_back(at);
      SolutionSnapshot snap;
      snap.time = samples[k];
      snap.set = set_;
      for (const auto& z : sparse_points(set_)) snap.values.emplace(z, fine.at(z));
      result_.snapshots.push_back(std::move(snap));
    }
    report_next += n_reports;
    result_.reports.push_back(report);
    if (config_.record_history) result_.set_history.push_back({t, t_end, set_});
    t = t_end;
    dtau *= config_.grow;

    CostSample c;
    c.time = t;
    c.approximation_steps = approximation_steps_;
    c.estimator_steps = estimator_steps_;
    c.mean_point_steps = points_.at(center_)->fine.current.state.accepted;
    c.n_colloc = weights_.timestepping.size();
    c.n_colloc_enhanced = weights_.correction.size();
    result_.cost.push_back(c);
  }

  result_.final_set = set_;
  result_.final_time = t;
  if (config_.record_history) {
    for (auto& [z, p] : points_) {
      p->history.tolerance = config_.tolerance;
      result_.trajectories.emplace(z, std::move(p->history));
    }
  }
  return std::move(result_);
}

}  // namespace

FemProblem::FemProblem(const SpatialMesh& mesh, std::shared_ptr<const WindModel> wind, double epsilon, HotWall wall)
    : assembler_(mesh, std::move(wind), epsilon, wall) {}

LinearOde FemProblem::system(std::span<const double> y) const {
  const SemiDiscreteSystem sys = assembler_.assemble(y);
  LinearOde ode;
  ode.mass = sys.mass;
  ode.stiffness = sys.stiffness();
  // Only the two boundary products are kept alive by the forcing.
  const Eigen::VectorXd mass_profile = sys.mass_boundary * sys.boundary_profile;
  const Eigen::VectorXd stiffness_profile =
      sys.epsilon * (sys.diffusion_boundary * sys.boundary_profile) + sys.advection_boundary * sys.boundary_profile;
  ode.forcing = [wall = sys.wall, mass_profile, stiffness_profile](double t) -> Eigen::VectorXd {
    return -wall.ramp_rate(t) * mass_profile - wall.ramp(t) * stiffness_profile;
  };
  return ode;
}

Eigen::VectorXd FemProblem::initial_condition() const {
  return Eigen::VectorXd::Zero(assembler_.mesh().num_interior());
}

LinearOde ComplexOdeFamily::system(std::span<const double> y) const {
  if (y.size() != 1) throw std::invalid_argument("the scalar ODE has one parameter");
  return complex_ode_system(problem_, y[0]);
}

Eigen::VectorXd ComplexOdeFamily::initial_condition() const { return embed(problem_.u0); }

std::vector<std::string> AdaptiveConfig::violations() const {
  std::vector<std::string> out;
  if (!(tolerance > 0.0)) out.push_back("tolerance must be positive");
  if (!(safety > 1.0)) out.push_back("safety must exceed 1");
  if (!(theta > 0.0 && theta < 1.0)) out.push_back("theta must lie in (0, 1)");
  if (!(sync_step > 0.0)) out.push_back("sync_step must be positive");
  if (!(grow >= 1.0)) out.push_back("grow must be at least 1");
  if (!(shrink > 0.0 && shrink < 1.0)) out.push_back("shrink must lie in (0, 1)");
  if (!(initial_step > 0.0)) out.push_back("initial_step must be positive");
  if (!(final_time > 0.0)) out.push_back("final_time must be positive");
  if (coarse_tolerance != 0.0 && !(coarse_tolerance >= 10.0 * tolerance)) {
    out.push_back("coarse_tolerance must be at least ten times tolerance");
  }
  if (max_level < 1 || max_level > 8) out.push_back("max_level must lie in [1, 8]");
  if (threads < 1) out.push_back("threads must be at least 1");
  for (std::size_t k = 0; k < report_times.size(); ++k) {
    if (!(report_times[k] > 0.0) || (k > 0 && !(report_times[k] > report_times[k - 1]))) {
      out.push_back("report_times must be positive and strictly increasing");
      break;
    }
  }
  for (std::size_t k = 0; k < sync_schedule.size(); ++k) {
    if (!(sync_schedule[k] > 0.0) || (k > 0 && !(sync_schedule[k] > sync_schedule[k - 1]))) {
      out.push_back("sync_schedule must be positive and strictly increasing");
      break;
    }
  }
  return out;
}

void AdaptiveConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string message = "invalid adaptive configuration:";
  for (const auto& s : v) message += "\n  " + s;
  throw std::invalid_argument(message);
}

IntegrationFailure::IntegrationFailure(const std::vector<double>& point, double time, const std::string& what)
    : std::runtime_error("time integration failed at collocation point y = " + describe_point(point) + " near t = " +
                         std::to_string(time) + ": " + what),
      point_(point),
      time_(time) {}

std::vector<MultiIndex> dorfler_mark(const std::map<MultiIndex, double>& indicators, double theta) {
  if (indicators.empty()) throw std::invalid_argument("no indicators to mark");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("marking parameter must lie in (0, 1)");
  std::vector<std::pair<MultiIndex, double>> order(indicators.begin(), indicators.end());
  double total = 0.0;
  for (const auto& [mu, v] : order) {
    if (!(v >= 0.0)) throw std::invalid_argument("indicators must be nonnegative");
    total += v;
  }
  // The map is lexicographic already; a stable sort keeps that order among ties.
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  const double target = (1.0 - theta) * total;
  std::vector<MultiIndex> marked;
  double sum = 0.0;
  for (const auto& [mu, v] : order) {
    marked.push_back(mu);
    sum += v;
    if (sum >= target) break;
  }
  return marked;
}

const MultiIndexSet& AdaptiveResult::set_at(double t) const {
  if (set_history.empty()) throw std::logic_error("run was not recorded with history");
  if (t < 0.0 || t > set_history.back().end) throw std::out_of_range("time outside the integrated range");
  for (const auto& s : set_history) {
    if (t <= s.end) return s.set;
  }
  return set_history.back().set;
}

SparseInterpolant AdaptiveResult::interpolant_at(double t) const {
  const MultiIndexSet& set = set_at(t);
  PointValues values;
  for (const auto& z : sparse_points(set)) values.emplace(z, eval_in_time(trajectories.at(z), t));
  return SparseInterpolant(set, values, t);
}

Eigen::VectorXd AdaptiveResult::evaluate(double t, std::span<const double> y) const {
  return interpolant_at(t).evaluate(y);
}

ReferenceSolution run_reference(const ParametricProblem& problem, const MultiIndexSet& set, double tolerance,
                                std::span<const double> times, double initial_step, int threads) {
  if (times.empty()) throw std::invalid_argument("reference needs at least one time");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || (k > 0 && !(times[k] > times[k - 1]))) {
      throw std::invalid_argument("reference times must be nonnegative and increasing");
    }
  }
  ReferenceSolution out;
  out.set = set;
  out.times.assign(times.begin(), times.end());
  const auto points = sparse_points(set);
  const Eigen::VectorXd u0 = problem.initial_condition();
  std::vector<std::vector<Eigen::VectorXd>> samples(points.size());
  std::vector<std::size_t> steps(points.size(), 0);
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const auto y = points[i].coordinates();
    const LinearOde ode = problem.system(y);
    AdaptiveOptions opts;
    opts.tolerance = tolerance;
    opts.initial_step = initial_step;
    TrAb2 stepper(ode, opts);
    IntegratorState state = make_state(u0, 0.0);
    std::vector<double> positive;
    for (double s : out.times) {
      if (s == 0.0) {
        samples[i].push_back(u0);
      } else {
        positive.push_back(s);
      }
    }
    Sampler sampler{&positive, 0, {}};
    try {
      stepper.advance(state, out.times.back(), [&](const StepInfo& info) {
        ++steps[i];
        sampler.observe(info);
      });
    } catch (const std::exception& e) {
      throw IntegrationFailure(y, state.time, e.what());
    }
    for (auto& v : sampler.values) samples[i].push_back(std::move(v));
  });
  out.values.resize(out.times.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t k = 0; k < out.times.size(); ++k) out.values[k].emplace(points[i], samples[i].at(k));
    out.total_steps += steps[i];
  }
  return out;
}

std::vector<double> reference_times(double tau, double final_time, std::size_t count) {
  return log_spaced(tau * std::log(1.0 / 0.9), final_time, count);
}

std::vector<EffectivitySample> effectivity(const ParametricProblem& problem, const AdaptiveResult& run,
                                           const ReferenceSolution& reference) {
  if (run.snapshots.size() != reference.times.size()) {
    throw std::invalid_argument("adaptive run was not sampled at the reference times");
  }
  std::vector<EffectivitySample> out;
  for (std::size_t k = 0; k < reference.times.size(); ++k) {
    const auto& snap = run.snapshots[k];
    if (std::abs(snap.time - reference.times[k]) > 1e-12 * std::max(1.0, reference.times[k])) {
      throw std::invalid_argument("adaptive run was not sampled at the reference times");
    }
    const SparseInterpolant approx(snap.set, snap.values, reference.times[k]);
    const double error = difference_norm(reference.interpolant(k), approx, problem.norm_matrix());
    const double estimate = run.report_estimates[k].total;
    out.push_back({reference.times[k], error, estimate, error > 0.0 ? estimate / error : 0.0});
  }
  return out;
}

AdaptiveResult run_adaptive(const ParametricProblem& problem, const AdaptiveConfig& config) {
  Driver driver(problem, config);
  return driver.run();
}

}  // namespace adaptsc
