#include "lloss/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "lloss/seeding.hpp"

namespace lloss {

TaskKind DatasetSpec::task() const {
  if (const auto* s = std::get_if<SynthConfig>(&source)) {
    return s->kind == SynthKind::GaussianMixture ? TaskKind::Classification : TaskKind::Regression;
  }
  return TaskKind::Classification;
}

std::size_t DatasetSpec::pool_size() const {
  if (const auto* s = std::get_if<SynthConfig>(&source)) return s->pool_size;
  return std::get<CifarSource>(source).pool_size;
}

std::size_t DatasetSpec::input_dim() const {
  if (const auto* s = std::get_if<SynthConfig>(&source)) {
    return s->kind == SynthKind::GaussianMixture ? s->input_dim : 1;
  }
  return kCifarPixels;
}

std::size_t DatasetSpec::output_dim() const {
  if (const auto* s = std::get_if<SynthConfig>(&source)) {
    return s->kind == SynthKind::GaussianMixture ? s->num_classes : s->output_dim;
  }
  return 10;
}

namespace {

std::size_t target_parameter_count(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::size_t n = 0, in = input_dim;
  for (auto h : hidden) {
    n += (in + 1) * h;
    in = h;
  }
  return n + (in + 1) * out;
}

std::size_t predictor_parameter_count(const std::vector<std::size_t>& hidden, std::size_t width) {
  std::size_t n = 0;
  for (auto h : hidden) n += (h + 1) * width;
  return n + hidden.size() * width + 1;
}

}  // namespace

std::vector<std::string> ExperimentConfig::violations() const {
  std::vector<std::string> out;
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos) {
    out.emplace_back("run_id must be a non-empty name without path separators");
  }

  if (const auto* s = std::get_if<SynthConfig>(&dataset.source)) {
    for (auto& v : s->violations()) out.push_back("dataset: " + v);
  } else {
    const auto& c = std::get<CifarSource>(dataset.source);
    if (c.path.empty()) out.emplace_back("dataset: cifar10 path must be set");
    if (c.pool_size == 0 || c.pool_size > 50000) out.emplace_back("dataset: pool_size must lie in [1, 50000]");
    if (c.test_size == 0 || c.test_size > 10000) out.emplace_back("dataset: test_size must lie in [1, 10000]");
  }

  bool dims_ok = model.hidden_dims.size() >= 2;
  if (!dims_ok) out.emplace_back("model: hidden_dims needs at least 2 blocks");
  for (auto h : model.hidden_dims) {
    if (h == 0) {
      out.emplace_back("model: hidden_dims entries must be positive");
      dims_ok = false;
      break;
    }
  }
  if (model.predictor_width == 0) {
    out.emplace_back("model: predictor_width must be positive");
    dims_ok = false;
  }
  if (dims_ok) {
    const auto target = target_parameter_count(dataset.input_dim(), model.hidden_dims, dataset.output_dim());
    const auto predictor = predictor_parameter_count(model.hidden_dims, model.predictor_width);
    if (predictor >= target) {
      out.push_back("model: loss predictor (" + std::to_string(predictor) +
                    " parameters) must be smaller than the target model (" + std::to_string(target) + ")");
    }
  }

  if (schedule.epochs == 0) out.emplace_back("schedule: epochs must be positive");
  for (auto& v : schedule.violations()) out.push_back("schedule: " + v);
  if (!(mse_lambda >= 0)) out.emplace_back("schedule: mse_lambda must be nonnegative");

  const std::size_t pool = dataset.pool_size();
  if (active.k == 0) out.emplace_back("active_learning: K must be positive");
  if (active.k > pool) {
    out.push_back("active_learning: K=" + std::to_string(active.k) + " exceeds the pool size " + std::to_string(pool));
  } else if (active.k > 0 && active.cycles > 0 && active.k * active.cycles >= pool) {
    out.emplace_back("active_learning: cycles exhaust the pool before the last cycle");
  }
  if (active.m == 0) out.emplace_back("active_learning: M must be positive");
  if (active.m < active.k) out.emplace_back("active_learning: M must be at least K");
  if (active.trials == 0) out.emplace_back("active_learning: trials must be positive");
  if (active.eval_cap < 2) out.emplace_back("active_learning: eval_cap must be at least 2");

  if (strategies.empty()) out.emplace_back("strategies: at least one strategy is required");
  std::set<StrategyKind> seen;
  for (const auto& s : strategies) {
    if (!seen.insert(s.kind).second) out.push_back("strategies: duplicate strategy " + s.name());
    if (s.kind == StrategyKind::Entropy && dataset.task() != TaskKind::Classification) {
      out.emplace_back("strategies: entropy requires a classification dataset");
    }
    if (s.coreset_tap && *s.coreset_tap >= model.hidden_dims.size()) {
      out.emplace_back("strategies: coreset_tap is out of range");
    }
  }
  return out;
}

TrainSchedule schedule_for(const ExperimentConfig& cfg, const Strategy& strategy) {
  TrainSchedule s = cfg.schedule;
  if (strategy.kind == StrategyKind::LearnedLossMSE) {
    s.objective = LossObjective::MeanSquared;
    s.lambda = cfg.mse_lambda;
  }
  return s;
}

DatasetSplit prepare_data(const DatasetSpec& spec) {
  DatasetSplit split;
  if (const auto* s = std::get_if<SynthConfig>(&spec.source)) {
    split = generate(*s);
  } else {
    const auto& c = std::get<CifarSource>(spec.source);
    Rng rng(c.seed);
    split = load_cifar10_split(c.path, c.pool_size, c.test_size, rng);
  }
  if (spec.normalize) normalize(split);
  return split;
}

ModelSet initial_model_set(const ExperimentConfig& cfg, const Dataset& pool, std::size_t trial) {
  Rng rng(derive_seed(cfg.seed, trial, Stream::ModelInit));
  const auto& dims = cfg.model.hidden_dims;
  TargetModel target = pool.task == TaskKind::Classification
                           ? build_mlp_classifier(pool.input_dim(), dims, pool.num_classes, rng)
                           : build_mlp_regressor(pool.input_dim(), dims, pool.output_dim(), rng);
  return make_model_set(std::move(target), cfg.model.predictor_width, rng);
}

namespace {

TrialResult run_trial(const ExperimentConfig& cfg, const DatasetSplit& data, const Strategy& strategy,
                      std::size_t trial) {
  const auto started = std::chrono::steady_clock::now();
  Rng init_rng(derive_seed(cfg.seed, trial, Stream::InitialLabels));
  PoolState state = init_labeled(data.pool, cfg.active.k, init_rng);
  Oracle oracle(data.pool);
  oracle.reveal(state.labeled);

  Rng eval_rng(derive_seed(cfg.seed, trial, Stream::Evaluation));
  CycleContext ctx;
  ctx.schedule = schedule_for(cfg, strategy);
  ctx.test = &data.test;
  ctx.eval_ids = evaluation_ids(data.test, cfg.active.eval_cap, eval_rng);
  ctx.oracle = &oracle;
  ctx.selection_rng = Rng(derive_seed(cfg.seed, trial, Stream::Selection));
  ctx.training_rng = Rng(derive_seed(cfg.seed, trial, Stream::Training));
  ctx.record_wall_clock = cfg.record_wall_clock;

  TrialResult result;
  result.initial_labeled = state.labeled;
  CycleOutcome outcome = run_initial_stage(ctx, std::move(state), initial_model_set(cfg, data.pool, trial));
  result.records.push_back(outcome.record);
  for (std::size_t c = 0; c < cfg.active.cycles; ++c) {
    outcome = run_cycle(ctx, std::move(outcome.state), std::move(outcome.models), strategy, cfg.active.k,
                        cfg.active.m);
    result.records.push_back(outcome.record);
  }
  result.final_losses = std::move(outcome.losses);
  result.epoch_logs = std::move(ctx.epoch_logs);
  result.labels_revealed = oracle.revealed_count();
  for (const ParamBlock* p : std::as_const(outcome.models).parameters()) result.final_parameters.push_back(p->value);
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, double CycleRecord::* field) {
  std::vector<SummaryRow> rows;
  if (trials.empty()) return rows;
  const std::size_t stages = trials.front().records.size();
  for (const auto& t : trials) {
    if (t.records.size() != stages) throw ValueError("trials disagree on cycle count");
  }
  const double n = static_cast<double>(trials.size());
  for (std::size_t s = 0; s < stages; ++s) {
    SummaryRow row;
    row.stage = trials.front().records[s].stage;
    double labeled = 0, sum = 0;
    for (const auto& t : trials) {
      labeled += static_cast<double>(t.records[s].labeled_size);
      sum += t.records[s].*field;
    }
    row.labeled_size = labeled / n;
    row.mean = sum / n;
    double sq = 0;
    for (const auto& t : trials) {
      const double d = t.records[s].*field - row.mean;
      sq += d * d;
    }
    row.std = std::sqrt(sq / n);
    rows.push_back(row);
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs) {
  const auto problems = cfg.violations();
  if (!problems.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValueError(msg);
  }
  const DatasetSplit data = prepare_data(cfg.dataset);

  ExperimentResult result;
  result.task = data.pool.task;
  const std::size_t trials = cfg.active.trials;
  for (const auto& s : cfg.strategies) result.strategies.push_back({s, std::vector<TrialResult>(trials), {}});

  const std::size_t total = cfg.strategies.size() * trials;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      try {
        auto& slot = result.strategies[job / trials];
        slot.trials[job % trials] = run_trial(cfg, data, slot.strategy, job % trials);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, total);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& s : result.strategies) s.summary = summarize(s.trials, &CycleRecord::test_metric);
  return result;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trial_csv(const std::filesystem::path& path, const std::vector<CycleRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "stage,labeled_size,test_metric,ranking_accuracy,pearson,seconds,selected_ids\n";
  for (const auto& r : records) {
    out << r.stage << ',' << r.labeled_size << ',' << format_real(r.test_metric) << ','
        << format_real(r.ranking_accuracy) << ',' << format_real(r.pearson) << ',' << format_real(r.seconds) << ',';
    for (std::size_t i = 0; i < r.selected_ids.size(); ++i) {
      if (i) out << ';';
      out << r.selected_ids[i];
    }
    out << '\n';
  }
}

void write_losses_csv(const std::filesystem::path& path, const LossSnapshot& losses) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "id,real_loss,predicted_loss,entropy\n";
  for (std::size_t i = 0; i < losses.ids.size(); ++i) {
    out << losses.ids[i] << ',' << format_real(losses.real[i]) << ',' << format_real(losses.predicted[i]) << ',';
    if (!losses.entropy.empty()) out << format_real(losses.entropy[i]);
    out << '\n';
  }
}

void write_summary_csv(const std::filesystem::path& path, const ExperimentResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "strategy,stage,mean,std\n";
  for (const auto& s : result.strategies) {
    for (const auto& row : s.summary) {
      out << s.strategy.name() << ',' << row.stage << ',' << format_real(row.mean) << ',' << format_real(row.std)
          << '\n';
    }
  }
}

RunFiles write_run_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  RunFiles files;
  fs::create_directories(dir);
  for (const auto& s : result.strategies) {
    const fs::path sdir = dir / s.strategy.name();
    fs::create_directories(sdir);
    std::vector<fs::path> written;
    for (std::size_t t = 0; t < s.trials.size(); ++t) {
      const auto& trial = s.trials[t];
      const std::string stem = "trial" + std::to_string(t);
      write_trial_csv(sdir / (stem + ".csv"), trial.records);
      write_losses_csv(sdir / (stem + "_losses.csv"), trial.final_losses);
      const fs::path epochs = sdir / (stem + "_epochs.csv");
      fs::remove(epochs);
      for (const auto& stage : trial.epoch_logs) append_epoch_log_csv(epochs, stage);
      {
        std::ofstream ckpt(sdir / (stem + ".ckpt"), std::ios::binary);
        if (!ckpt) throw FormatError("cannot write checkpoint in " + sdir.string());
        write_checkpoint(ckpt, std::span<const Tensor>(trial.final_parameters));
      }
      written.push_back(sdir / (stem + ".csv"));
    }
    files.per_strategy.emplace_back(s.strategy.name(), std::move(written));
  }
  files.summary = dir / "summary.csv";
  write_summary_csv(files.summary, result);
  return files;
}

}  // namespace lloss
