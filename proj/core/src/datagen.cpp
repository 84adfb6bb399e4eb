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

#include "gpuperf/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpuperf/diag.hpp"
#include "gpuperf/scheduler.hpp"

namespace gpuperf {
namespace {

using nlohmann::json;

void check_profile(const OracleProfile& p) {
  auto bad = [&](const std::string& what) {
    return Error("oracle profile '" + p.hardware + "': " + what);
  };
  if (!(p.e_max > 0.0 && p.e_max < 1.0)) throw bad("e_max must lie in (0, 1)");
  if (!(p.ramp_us > 0.0)) throw bad("ramp_us must be > 0");
  if (p.interference < 0.0 || p.interference >= 1.0) throw bad("interference must lie in [0, 1)");
  if (p.imbalance_penalty < 0.0) throw bad("imbalance_penalty must be >= 0");
  if (p.noise_sigma < 0.0) throw bad("noise_sigma must be >= 0");
}

const ParamRange& range_of(const CategoryRanges& r, const char* key) {
  auto it = r.find(key);
  if (it == r.end()) throw Error(std::string("missing sampling range for '") + key + "'");
  return it->second;
}

Count draw(const CategoryRanges& r, const char* key, Rng& rng) {
  const ParamRange& pr = range_of(r, key);
  return rng.log_uniform_int(pr.lo, pr.hi);
}

}  // namespace

bool operator==(const DatasetRecord& a, const DatasetRecord& b) {
  return a.category() == b.category() && a.params.precision == b.params.precision &&
         params_to_json(a.params) == params_to_json(b.params) && a.hardware == b.hardware &&
         a.latency_us == b.latency_us && a.tags == b.tags;
}

json to_json(const DatasetRecord& r) {
  json tags = r.tags;
  tags["precision"] = to_string(r.params.precision);
  return {{"kernel", to_string(r.category())},
          {"params", params_to_json(r.params)},
          {"hardware", r.hardware},
          {"latency_us", r.latency_us},
          {"tags", tags}};
}

DatasetRecord record_from_json(const json& j) {
  if (!j.is_object()) throw Error("record must be a JSON object");
  for (const char* key : {"kernel", "params", "hardware", "latency_us"}) {
    if (!j.contains(key)) throw Error(std::string("missing field '") + key + "'");
  }
  if (!j["kernel"].is_string() || !j["hardware"].is_string()) {
    throw Error("'kernel' and 'hardware' must be strings");
  }
  if (!j["latency_us"].is_number()) throw Error("'latency_us' must be a number");
  DatasetRecord r;
  const KernelCategory c = parse_category(j["kernel"].get<std::string>());
  std::optional<Precision> precision;
  if (j.contains("tags")) {
    if (!j["tags"].is_object()) throw Error("'tags' must be an object");
    for (const auto& [k, v] : j["tags"].items()) {
      if (!v.is_string()) throw Error("tag '" + k + "' must be a string");
      r.tags[k] = v.get<std::string>();
    }
    if (auto it = r.tags.find("precision"); it != r.tags.end()) precision = parse_precision(it->second);
  }
  r.params = params_from_json(c, j["params"], precision);
  validate(r.params);
  r.tags["precision"] = std::string(to_string(r.params.precision));
  r.hardware = j["hardware"].get<std::string>();
  r.latency_us = j["latency_us"].get<double>();
  if (!(r.latency_us > 0.0) || !std::isfinite(r.latency_us)) throw Error("latency_us must be > 0");
  return r;
}

LoadResult load_dataset(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& ex) {
        throw Error(std::string("invalid JSON: ") + ex.what());
      }
      result.records.push_back(record_from_json(j));
    } catch (const Error& ex) {
      const std::string msg = path.string() + ":" + std::to_string(lineno) + ": " + ex.what();
      if (!opts.skip_malformed) throw Error(msg);
      warn("skipping " + msg);
      result.skipped.push_back(msg);
    }
  }
  return result;
}

void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_dataset(out, records);
  if (!out) throw Error("failed writing " + path.string());
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(
    const std::vector<DatasetRecord>& records, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error("split fraction must lie in (0, 1)");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < records.size(); ++i) groups[records[i].hardware].push_back(i);

  // Largest-remainder allocation of round(f * n) test slots across groups.
  const auto total = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(records.size())));
  std::vector<std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (const auto& [name, idx] : groups) {
    const double exact = test_fraction * static_cast<double>(idx.size());
    quota.push_back(static_cast<std::size_t>(std::floor(exact)));
    remainders.emplace_back(exact - std::floor(exact), quota.size() - 1);
    assigned += quota.back();
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) {
    ++quota[remainders[k].second];
  }

  Rng rng(seed);
  std::vector<char> is_test(records.size(), 0);
  std::size_t g = 0;
  for (auto& [name, idx] : groups) {
    std::size_t q = quota[g++];
    if (idx.size() >= 5) q = std::clamp<std::size_t>(q, 1, idx.size() - 1);
    rng.shuffle(idx);
    for (std::size_t k = 0; k < q; ++k) is_test[idx[k]] = 1;
  }
  std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (is_test[i] ? out.second : out.first).push_back(records[i]);
  }
  return out;
}

const OracleProfile& SyntheticOracle::profile(const std::string& hardware) const {
  for (const auto& p : profiles) {
    if (p.hardware == hardware) return p;
  }
  throw Error("no oracle profile for hardware '" + hardware + "'");
}

SyntheticOracle SyntheticOracle::from_json(const json& j) {
  SyntheticOracle o;
  try {
    o.seed = j.value("seed", std::uint64_t{0});
    for (const auto& pj : j.at("profiles")) {
      OracleProfile p;
      p.hardware = pj.at("hardware").get<std::string>();
      p.e_max = pj.value("e_max", p.e_max);
      p.ramp_us = pj.value("ramp_us", p.ramp_us);
      p.interference = pj.value("interference", p.interference);
      p.imbalance_penalty = pj.value("imbalance_penalty", p.imbalance_penalty);
      p.noise_sigma = pj.value("noise_sigma", p.noise_sigma);
      check_profile(p);
      o.profiles.push_back(p);
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed oracle profile: ") + ex.what());
  }
  if (o.profiles.empty()) throw Error("oracle has no profiles");
  return o;
}

SyntheticOracle SyntheticOracle::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

json SyntheticOracle::to_json() const {
  json ps = json::array();
  for (const auto& p : profiles) {
    ps.push_back({{"hardware", p.hardware},
                  {"e_max", p.e_max},
                  {"ramp_us", p.ramp_us},
                  {"interference", p.interference},
                  {"imbalance_penalty", p.imbalance_penalty},
                  {"noise_sigma", p.noise_sigma}});
  }
  return {{"seed", seed}, {"profiles", ps}};
}

double synth_efficiency(const OracleProfile& p, const FeatureVector& fv, double imbalance_ratio,
                        double z) {
  std::vector<double> roofs{fv.cycles_global_gpu};
  for (Pipeline pipe : fv.pipelines) roofs.push_back(fv.total_cycles_on(pipe));
  std::sort(roofs.begin(), roofs.end(), std::greater<>());
  const double coupling = roofs[0] > 0.0 ? roofs[1] / roofs[0] : 0.0;

  const double ramp = 1.0 - std::exp(-fv.theoretical_time_us / p.ramp_us);
  const double interference = 1.0 - p.interference * coupling;
  const double balance = std::max(0.05, 1.0 - p.imbalance_penalty * (imbalance_ratio - 1.0));
  const double e = p.e_max * ramp * interference * balance * (1.0 + p.noise_sigma * z);
  return std::clamp(e, kOracleMinEfficiency, p.e_max);
}

double synth_latency(const OracleProfile& p, const KernelAnalysis& analysis,
                     const HardwareSpec& hw, Rng& rng) {
  const double ratio = imbalance_report(analysis.distribution, analysis.tasks, hw).imbalance_ratio;
  const double e = synth_efficiency(p, analysis.features, ratio, rng.normal());
  return analysis.features.theoretical_time_us / e;
}

CategoryRanges default_ranges(KernelCategory c) {
  switch (c) {
    case KernelCategory::Gemm:
      return {{"M", {2, 131072}}, {"N", {384, 152064}}, {"K", {256, 53248}}};
    case KernelCategory::ScaledMM:
      return {{"M", {2, 131072}}, {"N", {384, 8192}}, {"K", {256, 8192}}};
    case KernelCategory::Attention:
      return {{"bs", {1, 16}},      {"nh", {2, 128}},       {"nkv", {1, 8}},
              {"qlen", {1, 20097}}, {"kvlen", {4, 20481}}};
    case KernelCategory::RmsNorm: return {{"seq", {2, 131072}}, {"dim", {128, 16384}}};
    case KernelCategory::SiluMul: return {{"seq", {2, 131072}}, {"dim", {768, 106496}}};
    case KernelCategory::FusedMoE:
      return {{"M", {2, 8192}},   {"E", {8, 128}},    {"topk", {2, 8}},
              {"H", {1024, 4096}}, {"N", {512, 3072}}};
  }
  throw Error("unsupported kernel category");
}

KernelParams sample_params(KernelCategory c, const CategoryRanges& r, const HardwareSpec& hw,
                           Rng& rng) {
  KernelParams p;
  p.precision = default_precision(c);
  switch (c) {
    case KernelCategory::Gemm:
      p.shape = GemmShape{draw(r, "M", rng), draw(r, "N", rng), draw(r, "K", rng)};
      break;
    case KernelCategory::ScaledMM:
      p.shape = ScaledMmShape{draw(r, "M", rng), draw(r, "N", rng), draw(r, "K", rng)};
      break;
    case KernelCategory::Attention: {
      AttentionShape a;
      const Count bs = draw(r, "bs", rng);
      do {
        a.num_heads = draw(r, "nh", rng);
        a.num_kv_heads = draw(r, "nkv", rng);
      } while (a.num_heads % a.num_kv_heads != 0);
      a.head_dim = rng.uniform() < 0.5 ? 64 : 128;
      a.causal = true;
      a.variant = hw.compute_capability >= 9.0 && hw.compute_capability < 10.0
                      ? AttentionVariant::FA3
                      : AttentionVariant::FA2;
      const ParamRange& q = range_of(r, "qlen");
      const ParamRange& kv = range_of(r, "kvlen");
      for (Count b = 0; b < bs; ++b) {
        const Count kvlen = rng.log_uniform_int(kv.lo, kv.hi);
        const Count qhi = std::min(q.hi, kvlen);
        const Count qlen = qhi <= q.lo ? qhi : rng.log_uniform_int(q.lo, qhi);
        a.qlens.push_back(qlen);
        a.kvlens.push_back(kvlen);
      }
      p.shape = std::move(a);
      break;
    }
    case KernelCategory::RmsNorm:
      p.shape = RmsNormShape{draw(r, "seq", rng), draw(r, "dim", rng)};
      break;
    case KernelCategory::SiluMul:
      p.shape = SiluMulShape{draw(r, "seq", rng), draw(r, "dim", rng)};
      break;
    case KernelCategory::FusedMoE: {
      FusedMoeShape f;
      f.m = draw(r, "M", rng);
      f.experts = draw(r, "E", rng);
      f.topk = std::min(draw(r, "topk", rng), f.experts);
      f.hidden = draw(r, "H", rng);
      f.n = draw(r, "N", rng);
      p.shape = std::move(f);
      break;
    }
  }
  validate(p);
  return p;
}

std::vector<DatasetRecord> generate_dataset(const GenerateConfig& cfg,
                                            const SyntheticOracle& oracle,
                                            const TilingTable& tiling) {
  if (cfg.n_per_cell == 0) throw Error("empty cell: n_per_cell must be > 0");
  if (cfg.categories.empty() || cfg.hardware.empty()) throw Error("no categories or hardware to generate");
  if (cfg.degradation) {
    const auto& d = *cfg.degradation;
    if (d.fraction < 0.0 || d.fraction > 1.0 || d.delta < 0.0) throw Error("invalid degradation");
  }

  std::vector<DatasetRecord> out;
  out.reserve(cfg.categories.size() * cfg.hardware.size() * cfg.n_per_cell);
  std::uint64_t cell = 0;
  for (KernelCategory c : cfg.categories) {
    CategoryRanges ranges = default_ranges(c);
    if (auto it = cfg.ranges.find(c); it != cfg.ranges.end()) {
      for (const auto& [k, v] : it->second) {
        if (!ranges.count(k)) throw Error("unknown range key '" + k + "' for " + std::string(to_string(c)));
        if (v.lo < 1 || v.hi < v.lo) throw Error("invalid range for '" + k + "'");
        ranges[k] = v;
      }
    }
    for (const HardwareSpec& hw : cfg.hardware) {
      const OracleProfile& prof = oracle.profile(hw.name);
      const bool degrade = cfg.degradation && cfg.degradation->hardware == hw.name;
      Rng rng(Rng::derive(cfg.seed, cell++));
      for (std::size_t i = 0; i < cfg.n_per_cell; ++i) {
        DatasetRecord r;
        r.params = sample_params(c, ranges, hw, rng);
        r.hardware = hw.name;
        const KernelAnalysis a = analyze_kernel(r.params, hw, tiling);
        r.latency_us = synth_latency(prof, a, hw, rng);
        r.tags["source"] = "synthetic";
        if (degrade && rng.uniform() < cfg.degradation->fraction) {
          const double e = a.features.theoretical_time_us / r.latency_us;
          const double lowered = std::max(kOracleMinEfficiency, e - cfg.degradation->delta);
          r.latency_us = a.features.theoretical_time_us / lowered;
          r.tags["degraded"] = "true";
        }
        r.tags["precision"] = std::string(to_string(r.params.precision));
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace gpuperf
