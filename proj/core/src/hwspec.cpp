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

#include "gpuperf/hwspec.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gpuperf/diag.hpp"

namespace gpuperf {
namespace {

using json = nlohmann::json;

struct Range {
  const char* field;
  double lo;
  double hi;
};

// Documented envelope of current data-center and workstation parts.
// Global bandwidth upper bound admits the 4917 GB/s H200 entry.
constexpr Range kCompute{"compute_capability", 8.0, 12.0};
constexpr Range kSms{"num_sms", 78, 188};
constexpr Range kClock{"sm_clock_mhz", 1410, 2520};
constexpr Range kTensor{"tensor_throughput", 512, 4096};
constexpr Range kFma{"fma_throughput", 64, 128};
constexpr Range kXu{"xu_throughput", 16, 16};
constexpr Range kGlobal{"global_mem_bw_gbps", 696, 4917};
constexpr Range kL2{"l2_bw_gbps", 2430, 10400};
constexpr Range kSmemBw{"smem_bw_bytes_per_cycle_per_sm", 128, 128};
constexpr Range kSmemSize{"smem_size_per_sm_kib", 100, 228};
constexpr Range kRegfile{"regfile_size_per_sm_kib", 256, 256};

void check_range(const Range& r, double v, std::vector<std::string>& out) {
  if (v < r.lo || v > r.hi) {
    std::ostringstream os;
    os << r.field << "=" << v << " outside [" << r.lo << ", " << r.hi << "]";
    out.push_back(os.str());
  }
}

double required_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw Error(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw Error(std::string("invalid ") + what + ": must be > 0");
}

}  // namespace

std::optional<double> HardwareSpec::throughput(Pipeline p, Precision precision) const {
  switch (p) {
    case Pipeline::Tensor: {
      auto it = tensor_throughput.find(precision);
      if (it == tensor_throughput.end()) return std::nullopt;
      return it->second;
    }
    case Pipeline::FMA: return fma_throughput;
    case Pipeline::XU: return xu_throughput;
  }
  return std::nullopt;
}

std::vector<std::string> range_violations(const HardwareSpec& s) {
  std::vector<std::string> out;
  check_range(kCompute, s.compute_capability, out);
  check_range(kSms, s.num_sms, out);
  check_range(kClock, s.sm_clock_mhz, out);
  // Only the 16-bit MMA rate is enveloped; fp8/fp32 scale from it.
  for (auto p : {Precision::BF16, Precision::FP16}) {
    auto it = s.tensor_throughput.find(p);
    if (it != s.tensor_throughput.end()) check_range(kTensor, it->second, out);
  }
  check_range(kFma, s.fma_throughput, out);
  check_range(kXu, s.xu_throughput, out);
  check_range(kGlobal, s.global_mem_bw_gbps, out);
  check_range(kL2, s.l2_bw_gbps, out);
  check_range(kSmemBw, s.smem_bw_bytes_per_cycle_per_sm, out);
  check_range(kSmemSize, s.smem_size_per_sm_kib, out);
  check_range(kRegfile, s.regfile_size_per_sm_kib, out);
  return out;
}

HardwareSpec parse_spec(const json& j, Validation mode) {
  if (!j.is_object()) throw Error("hardware spec must be a JSON object");
  HardwareSpec s;
  auto name = j.find("name");
  if (name == j.end() || !name->is_string()) throw Error("missing field 'name'");
  s.name = name->get<std::string>();
  s.compute_capability = required_number(j, "compute_capability");

  double sms = required_number(j, "num_sms");
  if (!(sms > 0) || sms != static_cast<double>(static_cast<int>(sms))) {
    throw Error("invalid SM count");
  }
  s.num_sms = static_cast<int>(sms);

  s.sm_clock_mhz = required_number(j, "sm_clock_mhz");
  auto tt = j.find("tensor_throughput");
  if (tt == j.end()) throw Error("missing field 'tensor_throughput'");
  if (!tt->is_object() || tt->empty()) {
    throw Error("field 'tensor_throughput' must be a non-empty precision->number map");
  }
  for (auto& [tag, value] : tt->items()) {
    if (!value.is_number()) throw Error("tensor_throughput['" + tag + "'] must be a number");
    double v = value.get<double>();
    require_positive(v, ("tensor_throughput[" + tag + "]").c_str());
    s.tensor_throughput[parse_precision(tag)] = v;
  }
  s.fma_throughput = required_number(j, "fma_throughput");
  s.xu_throughput = required_number(j, "xu_throughput");
  s.global_mem_bw_gbps = required_number(j, "global_mem_bw_gbps");
  s.l2_bw_gbps = required_number(j, "l2_bw_gbps");
  s.smem_bw_bytes_per_cycle_per_sm = required_number(j, "smem_bw_bytes_per_cycle_per_sm");
  s.smem_size_per_sm_kib = required_number(j, "smem_size_per_sm_kib");
  s.regfile_size_per_sm_kib = required_number(j, "regfile_size_per_sm_kib");
  if (j.contains("max_warps_per_sm")) {
    s.max_warps_per_sm = static_cast<int>(required_number(j, "max_warps_per_sm"));
  }
  if (j.contains("max_ctas_per_sm")) {
    s.max_ctas_per_sm = static_cast<int>(required_number(j, "max_ctas_per_sm"));
  }

  require_positive(s.compute_capability, "compute_capability");
  require_positive(s.sm_clock_mhz, "sm_clock_mhz");
  require_positive(s.fma_throughput, "fma_throughput");
  require_positive(s.xu_throughput, "xu_throughput");
  require_positive(s.global_mem_bw_gbps, "global_mem_bw_gbps");
  require_positive(s.l2_bw_gbps, "l2_bw_gbps");
  require_positive(s.smem_bw_bytes_per_cycle_per_sm, "smem_bw_bytes_per_cycle_per_sm");
  require_positive(s.smem_size_per_sm_kib, "smem_size_per_sm_kib");
  require_positive(s.regfile_size_per_sm_kib, "regfile_size_per_sm_kib");
  require_positive(s.max_warps_per_sm, "max_warps_per_sm");
  require_positive(s.max_ctas_per_sm, "max_ctas_per_sm");

  for (const auto& v : range_violations(s)) {
    if (mode == Validation::Strict) throw Error(s.name + ": " + v);
    warn(s.name + ": " + v);
  }
  return s;
}

HardwareSpec load_spec(const std::filesystem::path& path, Validation mode) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open hardware spec '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": parse failure: " + e.what());
  }
  try {
    return parse_spec(j, mode);
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

json to_json(const HardwareSpec& s) {
  json tt = json::object();
  for (auto& [p, v] : s.tensor_throughput) tt[std::string(to_string(p))] = v;
  return json{{"name", s.name},
              {"compute_capability", s.compute_capability},
              {"num_sms", s.num_sms},
              {"sm_clock_mhz", s.sm_clock_mhz},
              {"tensor_throughput", tt},
              {"fma_throughput", s.fma_throughput},
              {"xu_throughput", s.xu_throughput},
              {"global_mem_bw_gbps", s.global_mem_bw_gbps},
              {"l2_bw_gbps", s.l2_bw_gbps},
              {"smem_bw_bytes_per_cycle_per_sm", s.smem_bw_bytes_per_cycle_per_sm},
              {"smem_size_per_sm_kib", s.smem_size_per_sm_kib},
              {"regfile_size_per_sm_kib", s.regfile_size_per_sm_kib},
              {"max_warps_per_sm", s.max_warps_per_sm},
              {"max_ctas_per_sm", s.max_ctas_per_sm}};
}

double cycles_to_us(double cycles, const HardwareSpec& spec) {
  return cycles / spec.sm_clock_mhz;
}

double bytes_to_cycles(double bytes, double bw_gbps, const HardwareSpec& spec) {
  // bytes / (bw * 1e9 B/s) seconds, times clock * 1e6 cycles/s.
  return bytes * spec.sm_clock_mhz / (bw_gbps * 1000.0);
}

SpecRegistry::SpecRegistry(const std::filesystem::path& dir, Validation mode) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("spec directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto spec = load_spec(f, mode);
    aliases_[f.stem().string()] = spec.name;
    add(std::move(spec));
  }
}

void SpecRegistry::add(HardwareSpec spec) {
  std::string key = spec.name;
  specs_.insert_or_assign(key, std::move(spec));
}

bool SpecRegistry::contains(const std::string& name) const {
  return specs_.count(name) > 0 || aliases_.count(name) > 0;
}

const HardwareSpec& SpecRegistry::get(const std::string& name) const {
  if (auto it = specs_.find(name); it != specs_.end()) return it->second;
  if (auto a = aliases_.find(name); a != aliases_.end()) return specs_.at(a->second);
  throw Error("unknown hardware '" + name + "'");
}

std::vector<std::string> SpecRegistry::names() const {
  std::vector<std::string> out;
  for (auto& [k, _] : specs_) out.push_back(k);
  return out;
}

const HardwareSpec& SpecRegistry::resolve(const std::string& path_or_name) {
  if (contains(path_or_name)) return get(path_or_name);
  std::filesystem::path p(path_or_name);
  if (std::filesystem::is_regular_file(p)) {
    auto spec = load_spec(p);
    std::string name = spec.name;
    aliases_[p.stem().string()] = name;
    aliases_[path_or_name] = name;
    add(std::move(spec));
    return get(name);
  }
  throw Error("unknown hardware '" + path_or_name + "' (not a file or registry entry)");
}

std::optional<std::filesystem::path> default_spec_dir() {
  if (const char* env = std::getenv("GPUPERF_SPEC_DIR"); env && *env) {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

}  // namespace gpuperf
