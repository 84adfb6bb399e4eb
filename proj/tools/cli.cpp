/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gpuperf/datagen.hpp"
#include "gpuperf/diag.hpp"
#include "gpuperf/e2e.hpp"
#include "gpuperf/estimator.hpp"
#include "gpuperf/features.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/nn/serialize.hpp"
#include "gpuperf/tiling.hpp"

#ifndef GPUPERF_DEFAULT_DATA_DIR
#define GPUPERF_DEFAULT_DATA_DIR "data"
#endif

namespace gpuperf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Raised for command-line problems detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string pct(double fraction) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << fraction * 100.0 << '%';
  return os.str();
}

fs::path data_dir() { return fs::path(GPUPERF_DEFAULT_DATA_DIR); }

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw Error(p.string() + ": " + ex.what());
  }
}

/// Inline JSON text, or @path to read it from a file.
json json_arg(const std::string& text, const char* what) {
  if (!text.empty() && text.front() == '@') return read_json_file(text.substr(1));
  try {
    return json::parse(text);
  } catch (const json::exception& ex) {
    throw Error(std::string("invalid JSON in ") + what + ": " + ex.what());
  }
}

struct Globals {
  std::string spec_dir;
  std::string tiling;
};

class Env {
 public:
  explicit Env(const Globals& g) : g_(g) {}

  SpecRegistry& registry() {
    if (!registry_) {
      fs::path dir;
      if (!g_.spec_dir.empty()) {
        dir = g_.spec_dir;
      } else if (auto env = default_spec_dir()) {
        dir = *env;
      } else {
        dir = data_dir() / "hw";
      }
      registry_ = fs::is_directory(dir) ? std::make_unique<SpecRegistry>(dir)
                                        : std::make_unique<SpecRegistry>();
    }
    return *registry_;
  }

  const HardwareSpec& hw(const std::string& name_or_path) {
    auto& reg = registry();
    if (reg.contains(name_or_path) || fs::is_regular_file(name_or_path)) {
      return reg.resolve(name_or_path);
    }
    // "a100.json" names a registry entry by file stem.
    const std::string stem = fs::path(name_or_path).stem().string();
    if (reg.contains(stem)) return reg.get(stem);
    return reg.resolve(name_or_path);
  }

  const TilingTable& tiling() {
    if (!tiling_) {
      tiling_ = std::make_unique<TilingTable>(g_.tiling.empty() ? TilingTable::builtin()
                                                                : TilingTable::load(g_.tiling));
    }
    return *tiling_;
  }

 private:
  const Globals& g_;
  std::unique_ptr<SpecRegistry> registry_;
  std::unique_ptr<TilingTable> tiling_;
};

std::vector<DatasetRecord> load_records(const std::string& path, bool skip) {
  LoadOptions opts;
  opts.skip_malformed = skip;
  return load_dataset(path, opts).records;
}

std::vector<PreparedSample> prepare_records(Env& env, const std::vector<DatasetRecord>& records) {
  std::vector<PreparedSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(prepare(r.sample(), env.hw(r.hardware), env.tiling()));
  return out;
}

KernelParams kernel_arg(const std::string& kernel, const std::string& params,
                        const std::string& precision) {
  const KernelCategory c = parse_category(kernel);
  std::optional<Precision> prec;
  if (!precision.empty()) prec = parse_precision(precision);
  KernelParams kp = params_from_json(c, json_arg(params, "--params"), prec);
  validate(kp);
  return kp;
}

void print_features(std::ostream& out, const KernelAnalysis& a) {
  const auto names = feature_layout(a.features.category);
  const auto values = a.features.values();
  std::size_t width = 0;
  for (const auto& n : names) width = std::max(width, n.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << names[i] << std::right
        << num(values[i], 10) << '\n';
  }
}

// ---- spec ---------------------------------------------------------------

struct SpecValidateOpts {
  std::string file;
  bool strict = false;
  bool json = false;
};

int cmd_spec_validate(const SpecValidateOpts& o, std::ostream& out) {
  const HardwareSpec s = load_spec(o.file, o.strict ? Validation::Strict : Validation::Warn);
  const auto issues = range_violations(s);
  if (o.json) {
    out << json{{"file", o.file}, {"name", s.name}, {"valid", true}, {"warnings", issues}}.dump(2)
        << '\n';
  } else {
    out << o.file << ": ok (" << s.name << ", " << s.num_sms << " SMs, " << issues.size()
        << " range warning" << (issues.size() == 1 ? "" : "s") << ")\n";
  }
  return kOk;
}

int cmd_spec_list(Env& env, bool as_json, std::ostream& out) {
  auto& reg = env.registry();
  json arr = json::array();
  for (const auto& name : reg.names()) {
    const auto& s = reg.get(name);
    if (as_json) {
      arr.push_back(to_json(s));
    } else {
      out << std::left << std::setw(14) << s.name << std::right << " cc " << num(s.compute_capability)
          << "  " << s.num_sms << " SMs  " << num(s.sm_clock_mhz) << " MHz  "
          << num(s.global_mem_bw_gbps) << " GB/s\n";
    }
  }
  if (as_json) out << arr.dump(2) << '\n';
  return kOk;
}

// ---- features / predict-kernel -------------------------------------------

struct KernelOpts {
  std::string hw;
  std::string kernel;
  std::string params;
  std::string precision;
  std::string model;
  bool dump_features = false;
  bool json = false;
};

int cmd_features(Env& env, const KernelOpts& o, std::ostream& out) {
  const KernelParams kp = kernel_arg(o.kernel, o.params, o.precision);
  const HardwareSpec& hw = env.hw(o.hw);
  const KernelAnalysis a = analyze_kernel(kp, hw, env.tiling());
  if (o.json) {
    json j = to_json(a.features);
    j["hardware"] = hw.name;
    j["precision"] = to_string(kp.precision);
    j["tasks"] = a.tasks.tasks.size();
    j["policy"] = to_string(a.tasks.policy);
    j["occupancy_limit"] = a.tasks.occupancy_limit;
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << to_string(kp.category()) << " on " << hw.name << " (" << to_string(kp.precision) << "): "
      << a.tasks.tasks.size() << " tasks, " << to_string(a.tasks.policy) << " scheduling, occupancy "
      << a.tasks.occupancy_limit << '\n';
  print_features(out, a);
  out << "theoretical_time_us  " << num(a.features.theoretical_time_us, 10) << '\n';
  return kOk;
}

int cmd_predict_kernel(Env& env, const KernelOpts& o, std::ostream& out) {
  const Estimator est = Estimator::load(o.model);
  const KernelParams kp = kernel_arg(o.kernel, o.params, o.precision);
  const HardwareSpec& hw = env.hw(o.hw);
  const KernelAnalysis a = analyze_kernel(kp, hw, env.tiling());
  const LatencyPrediction p = predict(est, kp, hw, env.tiling());
  if (o.json) {
    json j{{"kernel", to_string(kp.category())},
           {"hardware", hw.name},
           {"latency_us", p.latency_us},
           {"efficiency", p.efficiency},
           {"theoretical_time_us", p.theoretical_time_us}};
    if (o.dump_features) j["features"] = to_json(a.features)["features"];
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << "latency_us " << num(p.latency_us, 8) << " (efficiency " << num(p.efficiency, 4)
      << ", roof " << num(p.theoretical_time_us, 8) << " us)\n";
  if (o.dump_features) print_features(out, a);
  return kOk;
}

// ---- synth ----------------------------------------------------------------

struct SynthOpts {
  std::vector<std::string> kernels;
  std::vector<std::string> hw;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string oracle;
  std::string degrade;
  std::vector<std::string> ranges;
  bool json = false;
};

Degradation parse_degradation(const std::string& s) {
  // HW:FRACTION:DELTA
  const auto a = s.find(':');
  const auto b = s.find(':', a == std::string::npos ? a : a + 1);
  if (a == std::string::npos || b == std::string::npos) {
    throw UsageError("--degrade expects HW:FRACTION:DELTA, got '" + s + "'");
  }
  try {
    return {s.substr(0, a), std::stod(s.substr(a + 1, b - a - 1)), std::stod(s.substr(b + 1))};
  } catch (const std::exception&) {
    throw UsageError("--degrade expects numeric FRACTION and DELTA, got '" + s + "'");
  }
}

void parse_range(const std::string& s, std::map<KernelCategory, CategoryRanges>& out) {
  // kernel.KEY=LO:HI
  const auto dot = s.find('.');
  const auto eq = s.find('=');
  const auto colon = s.find(':', eq == std::string::npos ? 0 : eq);
  if (dot == std::string::npos || eq == std::string::npos || colon == std::string::npos || dot > eq) {
    throw UsageError("--range expects KERNEL.KEY=LO:HI, got '" + s + "'");
  }
  ParamRange r;
  try {
    r.lo = std::stoll(s.substr(eq + 1, colon - eq - 1));
    r.hi = std::stoll(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--range bounds must be integers, got '" + s + "'");
  }
  out[parse_category(s.substr(0, dot))][s.substr(dot + 1, eq - dot - 1)] = r;
}

int cmd_synth(Env& env, const SynthOpts& o, std::ostream& out) {
  GenerateConfig cfg;
  for (const auto& k : o.kernels) cfg.categories.push_back(parse_category(k));
  for (const auto& h : o.hw) cfg.hardware.push_back(env.hw(h));
  cfg.n_per_cell = o.n;
  cfg.seed = o.seed;
  for (const auto& r : o.ranges) parse_range(r, cfg.ranges);
  if (!o.degrade.empty()) {
    cfg.degradation = parse_degradation(o.degrade);
    cfg.degradation->hardware = env.hw(cfg.degradation->hardware).name;
  }
  const fs::path oracle_path = o.oracle.empty() ? data_dir() / "oracle" / "default.json" : fs::path(o.oracle);
  const SyntheticOracle oracle = SyntheticOracle::load(oracle_path);
  const auto records = generate_dataset(cfg, oracle, env.tiling());
  write_dataset(fs::path(o.out), records);
  if (o.json) {
    out << json{{"records", records.size()}, {"out", o.out}, {"seed", o.seed}}.dump(2) << '\n';
  } else {
    out << "wrote " << records.size() << " records to " << o.out << " (seed " << o.seed << ")\n";
  }
  return kOk;
}

// ---- train / evaluate / gap ------------------------------------------------

struct TrainOpts {
  std::string dataset;
  std::string out;
  std::string kernel;
  std::uint64_t seed = 0;
  std::string loss = "mape";
  double quantile = kCeilingQuantile;
  nn::TrainConfig cfg;
  double test_fraction = 0.0;
  std::string test_out;
  bool skip_malformed = false;
  bool json = false;
};

std::vector<DatasetRecord> filter_category(const std::vector<DatasetRecord>& records,
                                           std::optional<KernelCategory> want) {
  if (records.empty()) throw Error("dataset is empty");
  if (!want) {
    want = records.front().category();
    for (const auto& r : records) {
      if (r.category() != *want) throw UsageError("dataset mixes kernel categories; pass --kernel");
    }
    return records;
  }
  std::vector<DatasetRecord> out;
  for (const auto& r : records) {
    if (r.category() == *want) out.push_back(r);
  }
  if (out.empty()) throw Error("dataset has no " + std::string(to_string(*want)) + " records");
  return out;
}

int cmd_train(Env& env, TrainOpts o, std::ostream& out) {
  auto records = load_records(o.dataset, o.skip_malformed);
  std::optional<KernelCategory> want;
  if (!o.kernel.empty()) want = parse_category(o.kernel);
  records = filter_category(records, want);

  if (o.test_fraction > 0.0) {
    auto [train, test] = split(records, o.test_fraction, o.seed);
    if (!o.test_out.empty()) write_dataset(fs::path(o.test_out), test);
    records = std::move(train);
  } else if (!o.test_out.empty()) {
    throw UsageError("--test-out needs --test-fraction");
  }

  o.cfg.seed = o.seed;
  if (o.loss == "quantile") {
    o.cfg.loss = nn::LossSpec::quantile(o.quantile);
  } else if (o.loss != "mape") {
    throw UsageError("--loss must be 'mape' or 'quantile'");
  }
  const FitResult r = fit(prepare_records(env, records), o.cfg);
  r.estimator.save(o.out);

  if (o.json) {
    out << json{{"model", o.out},
                {"kernel", to_string(r.estimator.category)},
                {"loss", nn::to_json(o.cfg.loss)},
                {"seed", o.seed},
                {"train_samples", r.train_count},
                {"validation_samples", r.validation_count},
                {"epochs", r.history.val_loss.size()},
                {"best_epoch", r.history.best_epoch},
                {"best_val_loss", r.history.best_val_loss},
                {"clamped_targets", r.clamped_targets}}
               .dump(2)
        << '\n';
  } else {
    out << "trained " << to_string(r.estimator.category) << " estimator (" << nn::to_string(o.cfg.loss)
        << ", seed " << o.seed << ") on " << r.train_count << " samples, " << r.validation_count
        << " for validation\n"
        << "epochs " << r.history.val_loss.size() << ", best epoch " << r.history.best_epoch
        << ", best validation loss " << num(r.history.best_val_loss) << '\n';
    if (r.clamped_targets > 0) out << r.clamped_targets << " efficiency targets clamped to 1\n";
    out << "saved " << o.out << '\n';
  }
  return kOk;
}

struct EvalOpts {
  std::string model;
  std::string dataset;
  std::string csv;
  bool skip_malformed = false;
  bool json = false;
};

int cmd_evaluate(Env& env, const EvalOpts& o, std::ostream& out) {
  const Estimator est = Estimator::load(o.model);
  const auto records = filter_category(load_records(o.dataset, o.skip_malformed), est.category);
  const auto samples = prepare_records(env, records);
  std::vector<FeatureVector> fvs;
  for (const auto& s : samples) fvs.push_back(s.features);
  const auto eff = est.predict_efficiency(fvs);

  struct Acc {
    std::vector<double> lat_pred, lat_true, roof, eff_pred, eff_true;
  };
  std::map<std::string, Acc> by_hw;
  Acc all;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    double actual = s.raw_efficiency();
    clamp_efficiency(actual);
    const double e = std::min(eff[i], std::nextafter(1.0, 0.0));
    for (Acc* a : {&by_hw[s.hardware], &all}) {
      a->lat_pred.push_back(s.features.theoretical_time_us / e);
      a->lat_true.push_back(s.latency_us);
      a->roof.push_back(s.features.theoretical_time_us);
      a->eff_pred.push_back(e);
      a->eff_true.push_back(actual);
    }
  }
  auto row = [](const std::string& name, const Acc& a) {
    return json{{"hardware", name},
                {"samples", a.lat_true.size()},
                {"latency_mape", mape(a.lat_pred, a.lat_true)},
                {"efficiency_mape", mape(a.eff_pred, a.eff_true)},
                {"roofline_mape", mape(a.roof, a.lat_true)}};
  };
  json rows = json::array();
  for (const auto& [name, a] : by_hw) rows.push_back(row(name, a));
  const json overall = row("overall", all);

  if (o.json) {
    out << json{{"kernel", to_string(est.category)}, {"per_hardware", rows}, {"overall", overall}}.dump(2)
        << '\n';
    return kOk;
  }
  out << std::left << std::setw(14) << "hardware" << std::right << std::setw(9) << "samples"
      << std::setw(14) << "latency_mape" << std::setw(17) << "efficiency_mape" << std::setw(15)
      << "roofline_mape" << '\n';
  auto print = [&](const json& r) {
    out << std::left << std::setw(14) << r["hardware"].get<std::string>() << std::right << std::setw(9)
        << r["samples"].get<std::size_t>() << std::setw(14) << pct(r["latency_mape"].get<double>())
        << std::setw(17) << pct(r["efficiency_mape"].get<double>()) << std::setw(15)
        << pct(r["roofline_mape"].get<double>()) << '\n';
  };
  for (const auto& r : rows) print(r);
  print(overall);
  return kOk;
}

struct GapOpts {
  std::string model;
  std::string dataset;
  std::string csv;
  bool skip_malformed = false;
  bool json = false;
};

void write_cdf_csv(std::ostream& os, const GapReport& report) {
  os << "hardware,gap,cdf\n";
  for (const auto& h : report.per_hardware) {
    for (double x : gap_cdf_grid()) os << h.hardware << ',' << num(x, 4) << ',' << num(h.cdf(x), 6) << '\n';
  }
}

int cmd_gap(Env& env, const GapOpts& o, std::ostream& out) {
  const Estimator est = Estimator::load(o.model);
  if (!est.is_quantile()) throw Error(o.model + " is not a quantile-mode estimator");
  const auto records = filter_category(load_records(o.dataset, o.skip_malformed), est.category);
  const GapReport report = gap_report(est, prepare_records(env, records));
  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    if (!f) throw Error("cannot write " + o.csv);
    write_cdf_csv(f, report);
  }
  if (o.json) {
    out << to_json(report).dump(2) << '\n';
    return kOk;
  }
  out << "ceiling quantile " << num(est.loss.q, 3) << ", gap threshold " << num(report.threshold, 3)
      << '\n';
  out << std::left << std::setw(14) << "hardware" << std::right << std::setw(9) << "samples"
      << std::setw(17) << "underperforming" << std::setw(10) << "fraction" << '\n';
  for (const auto& h : report.per_hardware) {
    out << std::left << std::setw(14) << h.hardware << std::right << std::setw(9) << h.samples
        << std::setw(17) << h.underperforming << std::setw(10) << pct(h.fraction) << '\n';
  }
  out << "total underperforming " << report.total_underperforming() << '\n';
  if (o.csv.empty()) {
    out << '\n';
    write_cdf_csv(out, report);
  }
  return kOk;
}

// ---- e2e ------------------------------------------------------------------

struct TraceOpts {
  std::string model_config;
  int tp = 1;
  int pp = 1;
  bool replicate_kv = false;
  std::vector<std::string> requests;
  bool no_prefill = false;
  std::optional<Count> decode_steps;
  std::string variant = "fa2";
  std::string out;
  bool json = false;
};

Request parse_request(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) throw UsageError("--request expects INPUT_LEN:OUTPUT_LEN, got '" + s + "'");
  try {
    return {std::stoll(s.substr(0, c)), std::stoll(s.substr(c + 1))};
  } catch (const std::exception&) {
    throw UsageError("--request lengths must be integers, got '" + s + "'");
  }
}

KernelTrace build_trace(const TraceOpts& o) {
  if (o.model_config.empty()) throw UsageError("a model config (--model-config) is required");
  if (o.requests.empty()) throw UsageError("at least one --request is required");
  ModelConfig m = ModelConfig::load(o.model_config);
  ParallelConfig p;
  p.tp = o.tp;
  p.pp = o.pp;
  p.replicate_kv = o.replicate_kv;
  std::vector<Request> batch;
  for (const auto& r : o.requests) batch.push_back(parse_request(r));
  PhasePlan plan;
  plan.prefill = !o.no_prefill;
  plan.decode_steps = o.decode_steps;
  if (o.variant == "fa3") {
    plan.attention_variant = AttentionVariant::FA3;
  } else if (o.variant != "fa2") {
    throw UsageError("--variant must be 'fa2' or 'fa3'");
  }
  return generate_trace(m, p, batch, plan);
}

int cmd_gen_trace(const TraceOpts& o, std::ostream& out) {
  const KernelTrace trace = build_trace(o);
  std::size_t comm = 0;
  for (const auto& inv : trace) comm += inv.is_comm() ? 1 : 0;
  if (o.out.empty()) {
    write_trace(out, trace);
    return kOk;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw Error("cannot write " + o.out);
  write_trace(f, trace);
  if (o.json) {
    out << json{{"out", o.out}, {"invocations", trace.size()}, {"compute", trace.size() - comm}, {"comm", comm}}
               .dump(2)
        << '\n';
  } else {
    out << "wrote " << trace.size() << " invocations (" << trace.size() - comm << " compute, " << comm
        << " comm) to " << o.out << '\n';
  }
  return kOk;
}

struct E2EOpts {
  TraceOpts trace;
  std::string trace_file;
  std::string hw;
  std::vector<std::string> estimators;
  std::string comm;
  std::string link = "nvlink";
  std::string csv;
  bool json = false;
};

int cmd_predict_e2e(Env& env, const E2EOpts& o, std::ostream& out) {
  const KernelTrace trace = o.trace_file.empty() ? build_trace(o.trace) : load_trace(o.trace_file);
  EstimatorSet ests;
  for (const auto& path : o.estimators) {
    Estimator e = Estimator::load(path);
    const KernelCategory c = e.category;
    if (!ests.emplace(c, std::move(e)).second) {
      throw UsageError("two estimators given for " + std::string(to_string(c)) + " kernels");
    }
  }
  std::optional<CommModel> comm;
  const fs::path comm_path = o.comm.empty() ? data_dir() / "comm" / (o.link + ".json") : fs::path(o.comm);
  const bool needs_comm =
      std::any_of(trace.begin(), trace.end(), [](const Invocation& i) { return i.is_comm(); });
  if (needs_comm || !o.comm.empty()) comm = CommModel::load(comm_path);

  E2EContext ctx;
  ctx.estimators = &ests;
  ctx.hw = &env.hw(o.hw);
  ctx.tiling = &env.tiling();
  ctx.comm = comm ? &*comm : nullptr;
  ctx.link = o.link;
  const E2EResult r = predict_e2e(trace, ctx);

  if (!o.csv.empty()) {
    std::ofstream f(o.csv);
    if (!f) throw Error("cannot write " + o.csv);
    write_breakdown_csv(f, r);
  }
  if (o.json) {
    json j = to_json(r);
    j["hardware"] = ctx.hw->name;
    out << j.dump(2) << '\n';
    return kOk;
  }
  out << "hardware " << ctx.hw->name << ", " << r.breakdown.size() << " invocations\n"
      << "total_us   " << num(r.total_us, 10) << '\n'
      << "compute_us " << num(r.compute_us, 10) << '\n'
      << "comm_us    " << num(r.comm_us, 10) << '\n';
  for (const auto& [kind, share] : r.shares) {
    out << "  " << std::left << std::setw(12) << kind << std::right << std::setw(9) << pct(share) << '\n';
  }
  return kOk;
}

// ---- wiring ---------------------------------------------------------------

void add_json_flag(CLI::App* app, bool& flag) {
  app->add_flag("--json", flag, "Emit machine-readable JSON");
}

void add_trace_options(CLI::App* app, TraceOpts& t) {
  app->add_option("--model-config", t.model_config, "Model configuration JSON file");
  app->add_option("--tp", t.tp, "Tensor-parallel degree")->check(CLI::PositiveNumber);
  app->add_option("--pp", t.pp, "Pipeline-parallel degree")->check(CLI::PositiveNumber);
  app->add_flag("--replicate-kv", t.replicate_kv, "Replicate KV heads when tp exceeds num_kv_heads");
  app->add_option("--request", t.requests, "Request as INPUT_LEN:OUTPUT_LEN (repeatable)");
  app->add_flag("--no-prefill", t.no_prefill, "Omit the prefill forward pass");
  app->add_option("--decode-steps", t.decode_steps,
                  "Decode steps for every request (default: each request's output length)");
  app->add_option("--variant", t.variant, "Attention kernel variant: fa2 or fa3");
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"GPU kernel and end-to-end inference latency prediction", "gpuperf"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--spec-dir", g.spec_dir,
                 "Hardware spec directory (default: $GPUPERF_SPEC_DIR, then the bundled specs)");
  app.add_option("--tiling", g.tiling, "Tiling table JSON (default: built-in table)");

  auto* spec = app.add_subcommand("spec", "Inspect hardware specifications");
  spec->require_subcommand(1);
  SpecValidateOpts sv;
  auto* spec_validate = spec->add_subcommand("validate", "Validate a hardware spec file");
  spec_validate->add_option("file", sv.file, "Spec JSON file")->required();
  spec_validate->add_flag("--strict", sv.strict, "Treat out-of-range values as errors");
  add_json_flag(spec_validate, sv.json);
  bool list_json = false;
  auto* spec_list = spec->add_subcommand("list", "List the specs in the registry");
  add_json_flag(spec_list, list_json);

  KernelOpts fo;
  auto* features = app.add_subcommand("features", "Decompose, schedule and dump analytical features");
  features->add_option("--hw", fo.hw, "Hardware name or spec file")->required();
  features->add_option("--kernel", fo.kernel, "Kernel category")->required();
  features->add_option("--params", fo.params, "Kernel parameters as JSON text or @file")->required();
  features->add_option("--precision", fo.precision, "Precision tag (default per category)");
  add_json_flag(features, fo.json);

  SynthOpts so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from the oracle");
  synth->add_option("--kernel", so.kernels, "Kernel categories")->required()->delimiter(',');
  synth->add_option("--hw", so.hw, "Virtual GPUs (hardware names or spec files)")->required()->delimiter(',');
  synth->add_option("-n,--n", so.n, "Records per (kernel, hardware) cell")->required();
  synth->add_option("--seed", so.seed, "Random seed")->required();
  synth->add_option("--out", so.out, "Output JSONL path")->required();
  synth->add_option("--oracle", so.oracle, "Oracle profile JSON (default: bundled profile)");
  synth->add_option("--degrade", so.degrade, "Degrade samples of one GPU: HW:FRACTION:DELTA");
  synth->add_option("--range", so.ranges, "Override a sampling range: KERNEL.KEY=LO:HI (repeatable)");
  add_json_flag(synth, so.json);

  TrainOpts to;
  auto* train = app.add_subcommand("train", "Train a per-category estimator");
  train->add_option("--dataset", to.dataset, "Dataset JSONL")->required();
  train->add_option("--out", to.out, "Output estimator JSON")->required();
  train->add_option("--seed", to.seed, "Random seed")->required();
  train->add_option("--kernel", to.kernel, "Kernel category to select from the dataset");
  train->add_option("--loss", to.loss, "Loss: mape or quantile");
  train->add_option("--quantile", to.quantile, "Quantile for --loss quantile")->check(CLI::Range(0.0, 1.0));
  train->add_option("--epochs", to.cfg.max_epochs, "Maximum epochs");
  train->add_option("--batch-size", to.cfg.batch_size, "Mini-batch size");
  train->add_option("--lr", to.cfg.learning_rate, "AdamW learning rate");
  train->add_option("--weight-decay", to.cfg.weight_decay, "AdamW decoupled weight decay");
  train->add_option("--patience", to.cfg.patience, "Early-stopping patience in epochs");
  train->add_option("--val-fraction", to.cfg.validation_fraction, "Validation fraction");
  train->add_option("--test-fraction", to.test_fraction, "Hold out this fraction (stratified by hardware)");
  train->add_option("--test-out", to.test_out, "Write the held-out records here");
  train->add_flag("--skip-malformed", to.skip_malformed, "Skip malformed dataset lines");
  add_json_flag(train, to.json);

  EvalOpts eo;
  auto* evaluate = app.add_subcommand("evaluate", "MAPE per hardware and overall on a dataset");
  evaluate->add_option("--model", eo.model, "Estimator JSON")->required();
  evaluate->add_option("--dataset", eo.dataset, "Dataset JSONL")->required();
  evaluate->add_flag("--skip-malformed", eo.skip_malformed, "Skip malformed dataset lines");
  add_json_flag(evaluate, eo.json);

  KernelOpts po;
  auto* predict_kernel = app.add_subcommand("predict-kernel", "Predict one kernel's latency");
  predict_kernel->add_option("--hw", po.hw, "Hardware name or spec file")->required();
  predict_kernel->add_option("--kernel", po.kernel, "Kernel category")->required();
  predict_kernel->add_option("--params", po.params, "Kernel parameters as JSON text or @file")->required();
  predict_kernel->add_option("--model", po.model, "Estimator JSON")->required();
  predict_kernel->add_option("--precision", po.precision, "Precision tag (default per category)");
  predict_kernel->add_flag("--features", po.dump_features, "Also print the feature vector");
  add_json_flag(predict_kernel, po.json);

  TraceOpts tro;
  auto* gen_trace = app.add_subcommand("gen-trace", "Expand a model and request batch into a kernel trace");
  add_trace_options(gen_trace, tro);
  gen_trace->add_option("--out", tro.out, "Output JSONL path (default: standard output)");
  add_json_flag(gen_trace, tro.json);

  E2EOpts e2o;
  auto* predict_e2e_cmd = app.add_subcommand("predict-e2e", "Predict end-to-end latency of a trace");
  predict_e2e_cmd->add_option("--trace", e2o.trace_file, "Trace JSONL (otherwise generated from the model options)");
  add_trace_options(predict_e2e_cmd, e2o.trace);
  predict_e2e_cmd->add_option("--hw", e2o.hw, "Hardware name or spec file")->required();
  predict_e2e_cmd->add_option("--estimator", e2o.estimators, "Estimator JSON (repeatable, one per category)")->required();
  predict_e2e_cmd->add_option("--comm", e2o.comm, "Communication table JSON (default: bundled table for --link)");
  predict_e2e_cmd->add_option("--link", e2o.link, "Link profile name");
  predict_e2e_cmd->add_option("--csv", e2o.csv, "Write the per-invocation breakdown as CSV");
  add_json_flag(predict_e2e_cmd, e2o.json);

  GapOpts go;
  auto* gap = app.add_subcommand("gap", "Underperforming-point report from a quantile estimator");
  gap->add_option("--model", go.model, "Quantile-mode estimator JSON")->required();
  gap->add_option("--dataset", go.dataset, "Dataset JSONL")->required();
  gap->add_option("--csv", go.csv, "Write the gap CDF table as CSV");
  gap->add_flag("--skip-malformed", go.skip_malformed, "Skip malformed dataset lines");
  add_json_flag(gap, go.json);

  std::vector<const char*> argv{"gpuperf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    if (!app.get_subcommands().empty() && !app.get_subcommands().back()->get_subcommands().empty()) {
      out << app.get_subcommands().back()->get_subcommands().back()->help();
    }
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "gpuperf: error: " << e.what() << "\nRun 'gpuperf --help' for usage.\n";
    return kUsage;
  }

  Env env(g);
  if (*spec_validate) return cmd_spec_validate(sv, out);
  if (*spec_list) return cmd_spec_list(env, list_json, out);
  if (*features) return cmd_features(env, fo, out);
  if (*synth) return cmd_synth(env, so, out);
  if (*train) return cmd_train(env, to, out);
  if (*evaluate) return cmd_evaluate(env, eo, out);
  if (*predict_kernel) return cmd_predict_kernel(env, po, out);
  if (*gen_trace) return cmd_gen_trace(tro, out);
  if (*predict_e2e_cmd) return cmd_predict_e2e(env, e2o, out);
  if (*gap) return cmd_gap(env, go, out);
  err << "gpuperf: error: no command given\n";
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  ScopedWarningSink sink([&err](std::string_view msg) { err << "gpuperf: warning: " << msg << '\n'; });
  try {
    return dispatch(args, out, err);
  } catch (const UsageError& e) {
    err << "gpuperf: error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "gpuperf: error: " << e.what() << '\n';
    return kDataError;
  } catch (const json::exception& e) {
    err << "gpuperf: error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "gpuperf: error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    err << "gpuperf: error: internal: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace gpuperf::cli
