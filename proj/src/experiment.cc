#include "dynwm/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "dynwm/error.h"
#include "dynwm/gains.h"
#include "dynwm/plant.h"
#include "dynwm/rng.h"

namespace dynwm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int worker_count(int requested, std::int64_t jobs) {
  std::int64_t n = requested > 0 ? requested
                                 : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<int>(std::clamp<std::int64_t>(n, 1, std::max<std::int64_t>(jobs, 1)));
}

// Runs job(i) for i in [0, count) on a small pool. The first exception wins.
template <typename Job>
void parallel_for(std::int64_t count, int threads, Job&& job) {
  const int workers = worker_count(threads, count);
  if (workers == 1) {
    for (std::int64_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIOFailure, "cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error(ErrorCode::kIOFailure, "write failed: " + path.string());
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

Experiment prepare(const ScenarioConfig& config) {
  Experiment exp;
  exp.config = config;
  exp.warnings = config.validate();
  const PlantModel& model = config.model;
  std::optional<ControllerConfig> gains = config.gains;
  if (gains) gains->e_support = config.watermark_support;
  exp.ctl = design_or_validate_gains(model, gains, config.watermark_support);
  exp.kprime = compute_kprime(model.A, model.B, exp.ctl.K, model.C1);
  if (config.dwell_override) {
    exp.tau = *config.dwell_override;
  } else {
    exp.tau = dwell_time_tau(build_augmented_matrices(model, exp.ctl, 1).error_form,
                             build_augmented_matrices(model, exp.ctl, 0).error_form);
  }
  exp.params = make_detector_params(model, exp.ctl, exp.kprime);

  const ThresholdSpec& t = config.thresholds;
  const double cap = exp.params->s_cap();
  exp.c1_over_n = t.c1_over_n ? *t.c1_over_n : (t.single_s ? cap : exp.params->s1);
  exp.c2_over_n = t.c2_over_n ? *t.c2_over_n : (t.single_s ? cap : exp.params->s2);
  return exp;
}

TrialResult simulate(const Experiment& exp, std::int64_t trial_id,
                     const RunOptions& options, std::vector<double>* lateral) {
  const ScenarioConfig& cfg = exp.config;
  const AttackSpec& attack = options.attack ? *options.attack : cfg.attack;
  const bool switching = options.switching.value_or(cfg.switching_enabled);

  TrialResult result;
  result.trial_id = trial_id;
  result.seed = derive_trial_seed(cfg.seed, static_cast<std::uint64_t>(trial_id));

  SimState state = make_initial_state(cfg.model, exp.kprime, result.seed);
  Attacker attacker(attack, result.seed);
  TestAccumulator acc(exp.params);
  SwitchState policy;
  policy.tau = exp.tau;
  policy.warmup = cfg.warmup;
  policy.rule = cfg.thresholds.rule;

  const bool need_phi3 = options.record_steps || static_cast<bool>(options.observer);
  if (lateral) {
    lateral->clear();
    lateral->reserve(static_cast<std::size_t>(cfg.steps));
  }

  for (std::int64_t n = 0; n < cfg.steps; ++n) {
    state.alpha = switching ? policy.alpha : 1;
    const double y = state.x(cfg.tracked_state);
    if (lateral) lateral->push_back(y);
    const StepOutput out = step(state, cfg.model, exp.ctl, attacker);
    acc.update(out.residual, lagged_watermark(state));

    const std::int64_t N = acc.count();
    const double phi1 = spectral_norm(acc.phi1());
    const double phi2 = spectral_norm(acc.phi2());
    const double t1 = threshold(N, cfg.thresholds.rho1, exp.c1_over_n);
    const double t2 = threshold(N, cfg.thresholds.rho2, exp.c2_over_n);
    const MonitoredStatistics monitor = cfg.thresholds.monitor;
    const double t1_eff = monitor == MonitoredStatistics::kPhi2 ? kInf : t1;
    const double t2_eff = monitor == MonitoredStatistics::kPhi1 ? kInf : t2;

    const std::size_t before = policy.switch_log.size();
    policy = decide(std::move(policy), phi1, phi2, t1_eff, t2_eff);
    if (policy.switch_log.size() > before) {
      const SwitchEvent& ev = policy.switch_log.back();
      if (ev.to == 0) {
        if (!result.detected_at) result.detected_at = ev.step;
        if (attack.active_at(n)) {
          if (!result.attack_detected_at) result.attack_detected_at = ev.step;
        } else {
          ++result.false_switches;
        }
      }
    }

    if (need_phi3) {
      StepRecord rec;
      rec.trial_id = trial_id;
      rec.n = n;
      rec.alpha = state.alpha;
      rec.phi1_norm = phi1;
      rec.phi2_norm = phi2;
      rec.phi3_norm = spectral_norm(acc.phi3());
      rec.t1 = t1;
      rec.t2 = t2;
      rec.y_lateral = y;
      rec.attack_active = attack.active_at(n);
      if (options.observer) options.observer(rec);
      if (options.record_steps) result.steps.push_back(rec);
    }
  }
  result.switch_count = static_cast<std::int64_t>(policy.switch_log.size());
  result.switch_log = std::move(policy.switch_log);
  return result;
}

TrialResult run_trial(const Experiment& exp, std::int64_t trial_id,
                      const StepObserver& observer) {
  RunOptions options;
  options.record_steps = trial_id < exp.config.step_log_trials;
  options.observer = observer;
  if (exp.config.attack.kind == AttackKind::kNone) {
    return simulate(exp, trial_id, options);
  }
  std::vector<double> attacked;
  std::vector<double> clean;
  TrialResult result = simulate(exp, trial_id, options, &attacked);
  RunOptions reference;
  reference.attack = AttackSpec{};
  simulate(exp, trial_id, reference, &clean);
  for (std::size_t i = 0; i < attacked.size(); ++i) {
    result.max_lateral_dev =
        std::max(result.max_lateral_dev, std::abs(attacked[i] - clean[i]));
  }
  return result;
}

std::vector<TrialResult> run_trials(const Experiment& exp) {
  std::vector<TrialResult> results(static_cast<std::size_t>(exp.config.trials));
  parallel_for(exp.config.trials, exp.config.threads, [&](std::int64_t i) {
    results[static_cast<std::size_t>(i)] = run_trial(exp, i);
  });
  return results;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& config,
                                const std::vector<double>& rho_grid) {
  std::vector<SweepRow> rows;
  for (double rho : rho_grid) {
    ScenarioConfig c = config;
    c.thresholds.rho1 = rho;
    c.thresholds.rho2 = rho;
    c.rho_grid.clear();
    const Experiment exp = prepare(c);
    const std::int64_t trials = c.trials;
    const bool attacked = c.attack.kind != AttackKind::kNone;

    std::vector<TrialResult> with_attack(static_cast<std::size_t>(trials));
    std::vector<TrialResult> without(attacked ? trials : 0);
    parallel_for(trials, c.threads, [&](std::int64_t i) {
      with_attack[static_cast<std::size_t>(i)] = simulate(exp, i, {});
      if (attacked) {
        RunOptions clean;
        clean.attack = AttackSpec{};
        without[static_cast<std::size_t>(i)] = simulate(exp, i, clean);
      }
    });
    const auto& clean_runs = attacked ? without : with_attack;

    SweepRow row;
    row.rho = rho;
    row.trials = trials;
    std::vector<double> times;
    for (const TrialResult& r : with_attack) {
      const auto& hit = attacked ? r.attack_detected_at : r.detected_at;
      if (hit) times.push_back(static_cast<double>(*hit - c.attack.start_step));
    }
    row.detection_rate = static_cast<double>(times.size()) / trials;
    row.mean_detection_time =
        times.empty() ? std::numeric_limits<double>::quiet_NaN()
                      : std::accumulate(times.begin(), times.end(), 0.0) / times.size();
    row.median_detection_time = median(times);
    std::int64_t any = 0;
    std::int64_t total = 0;
    for (const TrialResult& r : clean_runs) {
      any += r.switch_count > 0;
      total += r.false_switches;
    }
    row.false_switch_rate = static_cast<double>(any) / trials;
    row.mean_false_switches = static_cast<double>(total) / trials;
    rows.push_back(row);
  }
  return rows;
}

void write_trials_csv(const std::filesystem::path& path,
                      const std::vector<TrialResult>& results) {
  std::ofstream out = open_for_write(path);
  out << "trial_id,detected_at,switch_count,false_switches,max_lateral_dev,seed\n";
  for (const TrialResult& r : results) {
    out << r.trial_id << ','
        << (r.detected_at ? std::to_string(*r.detected_at) : std::string()) << ','
        << r.switch_count << ',' << r.false_switches << ','
        << format_double(r.max_lateral_dev) << ',' << r.seed << '\n';
  }
  finish(out, path);
}

void write_steps_csv(const std::filesystem::path& path,
                     const std::vector<TrialResult>& results) {
  std::ofstream out = open_for_write(path);
  out << "trial_id,n,alpha,phi1_norm,phi2_norm,phi3_norm,t1,t2,y_lateral,"
         "attack_active\n";
  for (const TrialResult& r : results) {
    for (const StepRecord& s : r.steps) {
      out << s.trial_id << ',' << s.n << ',' << s.alpha << ','
          << format_double(s.phi1_norm) << ',' << format_double(s.phi2_norm)
          << ',' << format_double(s.phi3_norm) << ',' << format_double(s.t1)
          << ',' << format_double(s.t2) << ',' << format_double(s.y_lateral)
          << ',' << (s.attack_active ? 1 : 0) << '\n';
    }
  }
  finish(out, path);
}

void write_sweep_csv(const std::filesystem::path& path,
                     const std::vector<SweepRow>& rows) {
  std::ofstream out = open_for_write(path);
  out << "rho,trials,detection_rate,mean_detection_time,median_detection_time,"
         "false_switch_rate,mean_false_switches\n";
  for (const SweepRow& r : rows) {
    out << format_double(r.rho) << ',' << r.trials << ','
        << format_double(r.detection_rate) << ','
        << format_double(r.mean_detection_time) << ','
        << format_double(r.median_detection_time) << ','
        << format_double(r.false_switch_rate) << ','
        << format_double(r.mean_false_switches) << '\n';
  }
  finish(out, path);
}

std::vector<TrialResult> run_monte_carlo(const ScenarioConfig& config,
                                         const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIOFailure,
                "cannot create " + out_dir.string() + ": " + ec.message());
  }
  const Experiment exp = prepare(config);
  std::vector<TrialResult> results = run_trials(exp);
  write_trials_csv(out_dir / "trials.csv", results);
  if (config.step_log_trials > 0) write_steps_csv(out_dir / "steps.csv", results);
  if (!config.rho_grid.empty()) {
    write_sweep_csv(out_dir / "sweep.csv", run_sweep(config, config.rho_grid));
  }
  return results;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIOFailure, "cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kIOFailure, path.string() + " is empty");
  }
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::kIOFailure, path.string() + ": ragged row");
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace dynwm
