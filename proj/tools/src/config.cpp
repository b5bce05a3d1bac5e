#include "lloss_cli/config.hpp"

#include <fstream>
#include <set>

namespace lloss::cli {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = as<T>(obj_.at(key), path(key));
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string path(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key " + path(key));
    }
  }

  template <typename T>
  static T as(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + ": expected a nonnegative integer");
      return static_cast<T>(v.get<std::uint64_t>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
      return static_cast<T>(v.get<double>());
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
      return std::filesystem::path(v.get<std::string>());
    } else {
      static_assert(std::is_same_v<T, std::vector<std::size_t>>);
      if (!v.is_array()) throw ConfigError(where + ": expected an array of integers");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as<std::size_t>(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

DatasetSpec parse_dataset(const json& j) {
  Reader r(j, "dataset");
  DatasetSpec spec;
  std::string kind = "gaussian_mixture";
  r.get("kind", kind);
  r.get("normalize", spec.normalize);
  if (kind == "cifar10") {
    CifarSource c;
    r.get("path", c.path);
    r.get("pool_size", c.pool_size);
    r.get("test_size", c.test_size);
    r.get("seed", c.seed);
    spec.source = c;
  } else if (kind == "gaussian_mixture" || kind == "sine_regression") {
    SynthConfig s;
    s.kind = kind == "gaussian_mixture" ? SynthKind::GaussianMixture : SynthKind::SineRegression;
    r.get("pool_size", s.pool_size);
    r.get("test_size", s.test_size);
    r.get("noise", s.noise);
    r.get("seed", s.seed);
    if (s.kind == SynthKind::GaussianMixture) {
      r.get("num_classes", s.num_classes);
      r.get("input_dim", s.input_dim);
      r.get("radius", s.radius);
    } else {
      r.get("output_dim", s.output_dim);
      r.get("interval", s.interval);
      r.get("frequency", s.frequency);
      r.get("heteroscedastic", s.heteroscedastic);
    }
    spec.source = s;
  } else {
    throw ConfigError("dataset.kind: unknown dataset '" + kind + "'");
  }
  r.finish();
  return spec;
}

Strategy parse_strategy_entry(const json& j, const std::string& where) {
  Strategy s;
  std::string name;
  if (j.is_string()) {
    name = j.get<std::string>();
  } else {
    Reader r(j, where);
    if (!r.has("name")) throw ConfigError(where + ": missing name");
    name = Reader::as<std::string>(r.at("name"), r.path("name"));
    if (r.has("tap")) s.coreset_tap = Reader::as<std::size_t>(r.at("tap"), r.path("tap"));
    r.finish();
  }
  try {
    s.kind = parse_strategy(name);
  } catch (const ValueError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  if (s.coreset_tap && s.kind != StrategyKind::CoreSet) throw ConfigError(where + ": tap applies to coreset only");
  return s;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  Reader r(j, "");
  ExperimentConfig cfg;
  r.get("run_id", cfg.run_id);
  r.get("seed", cfg.seed);
  r.get("output_dir", cfg.output_dir);
  r.get("record_wall_clock", cfg.record_wall_clock);
  if (r.has("dataset")) cfg.dataset = parse_dataset(r.at("dataset"));

  if (r.has("model")) {
    Reader m(r.at("model"), "model");
    m.get("hidden_dims", cfg.model.hidden_dims);
    m.get("predictor_width", cfg.model.predictor_width);
    m.finish();
  }

  if (r.has("schedule")) {
    Reader s(r.at("schedule"), "schedule");
    TrainSchedule& t = cfg.schedule;
    s.get("epochs", t.epochs);
    s.get("batch_size", t.batch_size);
    s.get("learning_rate", t.optim.learning_rate);
    s.get("momentum", t.optim.momentum);
    s.get("weight_decay", t.optim.weight_decay);
    s.get("lr_drop_factor", t.lr_drop_factor);
    s.get("grad_stop_fraction", t.grad_stop_fraction);
    s.get("lambda", t.lambda);
    s.get("margin", t.margin);
    s.get("mse_lambda", cfg.mse_lambda);
    if (s.has("lr_drop_epoch")) {
      const json& v = s.at("lr_drop_epoch");
      t.lr_drop_epoch = v.is_null() ? std::nullopt
                                    : std::optional<std::size_t>(Reader::as<std::size_t>(v, "schedule.lr_drop_epoch"));
    } else {
      t.lr_drop_epoch = t.epochs * 4 / 5;
    }
    s.finish();
  } else {
    cfg.schedule.lr_drop_epoch = cfg.schedule.epochs * 4 / 5;
  }

  if (r.has("active_learning")) {
    Reader a(r.at("active_learning"), "active_learning");
    a.get("k", cfg.active.k);
    a.get("m", cfg.active.m);
    a.get("cycles", cfg.active.cycles);
    a.get("trials", cfg.active.trials);
    a.get("eval_cap", cfg.active.eval_cap);
    a.finish();
  }

  if (r.has("strategies")) {
    const json& list = r.at("strategies");
    if (!list.is_array()) throw ConfigError("strategies: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.strategies.push_back(parse_strategy_entry(list[i], "strategies[" + std::to_string(i) + "]"));
    }
  }
  r.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& cfg) {
  json d;
  if (const auto* s = std::get_if<SynthConfig>(&cfg.dataset.source)) {
    d["kind"] = s->kind == SynthKind::GaussianMixture ? "gaussian_mixture" : "sine_regression";
    d["pool_size"] = s->pool_size;
    d["test_size"] = s->test_size;
    d["noise"] = s->noise;
    d["seed"] = s->seed;
    if (s->kind == SynthKind::GaussianMixture) {
      d["num_classes"] = s->num_classes;
      d["input_dim"] = s->input_dim;
      d["radius"] = s->radius;
    } else {
      d["output_dim"] = s->output_dim;
      d["interval"] = s->interval;
      d["frequency"] = s->frequency;
      d["heteroscedastic"] = s->heteroscedastic;
    }
  } else {
    const auto& c = std::get<CifarSource>(cfg.dataset.source);
    d["kind"] = "cifar10";
    d["path"] = c.path.string();
    d["pool_size"] = c.pool_size;
    d["test_size"] = c.test_size;
    d["seed"] = c.seed;
  }
  d["normalize"] = cfg.dataset.normalize;

  const TrainSchedule& t = cfg.schedule;
  json sched = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"learning_rate", t.optim.learning_rate},
                {"momentum", t.optim.momentum},
                {"weight_decay", t.optim.weight_decay},
                {"lr_drop_factor", t.lr_drop_factor},
                {"grad_stop_fraction", t.grad_stop_fraction},
                {"lambda", t.lambda},
                {"margin", t.margin},
                {"mse_lambda", cfg.mse_lambda}};
  sched["lr_drop_epoch"] = t.lr_drop_epoch ? json(*t.lr_drop_epoch) : json(nullptr);

  json strategies = json::array();
  for (const auto& s : cfg.strategies) {
    if (s.coreset_tap) {
      strategies.push_back({{"name", s.name()}, {"tap", *s.coreset_tap}});
    } else {
      strategies.push_back(s.name());
    }
  }

  return {{"run_id", cfg.run_id},
          {"seed", cfg.seed},
          {"output_dir", cfg.output_dir.string()},
          {"record_wall_clock", cfg.record_wall_clock},
          {"dataset", d},
          {"model", {{"hidden_dims", cfg.model.hidden_dims}, {"predictor_width", cfg.model.predictor_width}}},
          {"schedule", sched},
          {"active_learning",
           {{"k", cfg.active.k},
            {"m", cfg.active.m},
            {"cycles", cfg.active.cycles},
            {"trials", cfg.active.trials},
            {"eval_cap", cfg.active.eval_cap}}},
          {"strategies", strategies}};
}

}  // namespace lloss::cli
