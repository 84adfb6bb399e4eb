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

#include "gpuperf/e2e.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

namespace gpuperf {
namespace {

using nlohmann::json;

Count get_count(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("model config: missing field '") + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw Error(std::string("model config: '") + key + "' must be an integer");
  return v.get<Count>();
}

struct ForwardPass {
  std::string phase;
  std::vector<Count> qlens;
  std::vector<Count> kvlens;

  Count tokens() const {
    Count t = 0;
    for (Count q : qlens) t += q;
    return t;
  }
  Count sequences() const { return static_cast<Count>(qlens.size()); }
};

class TraceBuilder {
 public:
  TraceBuilder(const ModelConfig& m, const ParallelConfig& p, const PhasePlan& plan)
      : m_(m), p_(p), plan_(plan) {
    const Count tp = p.tp;
    heads_ = m.num_heads / tp;
    if (m.num_kv_heads % tp == 0) {
      kv_heads_ = m.num_kv_heads / tp;
    } else if (p.replicate_kv && tp % m.num_kv_heads == 0) {
      kv_heads_ = 1;
    } else {
      throw Error("tensor parallel degree " + std::to_string(tp) + " does not divide num_kv_heads " +
                  std::to_string(m.num_kv_heads) + " (set replicate_kv to replicate)");
    }
    inter_ = m.intermediate_size / tp;
    const auto per_stage = stage_layers(m.num_layers, p.pp);
    Count end = 0;
    for (std::size_t s = 0; s + 1 < per_stage.size(); ++s) {
      end += per_stage[s];
      stage_ends_.push_back(end - 1);
    }
  }

  void emit(const ForwardPass& fp, KernelTrace& trace) const {
    const Count t = fp.tokens();
    const Count act_bytes = t * m_.hidden_size * bytes_per_element(m_.precision);
    for (Count l = 0; l < m_.num_layers; ++l) {
      const int layer = static_cast<int>(l);
      kernel(trace, fp, "input_norm", layer, RmsNormShape{t, m_.hidden_size});
      kernel(trace, fp, "qkv_proj", layer,
             GemmShape{t, (heads_ + 2 * kv_heads_) * m_.head_dim, m_.hidden_size});
      AttentionShape a;
      a.num_heads = heads_;
      a.num_kv_heads = kv_heads_;
      a.head_dim = m_.head_dim;
      a.qlens = fp.qlens;
      a.kvlens = fp.kvlens;
      a.causal = true;
      a.variant = plan_.attention_variant;
      kernel(trace, fp, "attention", layer, std::move(a));
      kernel(trace, fp, "o_proj", layer, GemmShape{t, m_.hidden_size, heads_ * m_.head_dim});
      allreduce(trace, fp, layer, act_bytes);
      kernel(trace, fp, "post_attention_norm", layer, RmsNormShape{t, m_.hidden_size});
      if (m_.moe) {
        kernel(trace, fp, "moe_gate_up", layer,
               FusedMoeShape{t, m_.moe->experts, m_.moe->topk, m_.hidden_size, 2 * inter_, {}});
        kernel(trace, fp, "moe_down", layer,
               FusedMoeShape{t, m_.moe->experts, m_.moe->topk, inter_, m_.hidden_size, {}});
      } else {
        kernel(trace, fp, "gate_up_proj", layer, GemmShape{t, 2 * inter_, m_.hidden_size});
        kernel(trace, fp, "silu_mul", layer, SiluMulShape{t, inter_});
        kernel(trace, fp, "down_proj", layer, GemmShape{t, m_.hidden_size, inter_});
      }
      allreduce(trace, fp, layer, act_bytes);
      if (std::find(stage_ends_.begin(), stage_ends_.end(), l) != stage_ends_.end()) {
        trace.push_back({fp.phase, "sendrecv", layer, CommCall{Collective::SendRecv, 2, act_bytes}});
      }
    }
    kernel(trace, fp, "final_norm", -1, RmsNormShape{t, m_.hidden_size});
    kernel(trace, fp, "lm_head", -1, GemmShape{fp.sequences(), m_.vocab_size / p_.tp, m_.hidden_size});
  }

 private:
  void kernel(KernelTrace& trace, const ForwardPass& fp, const char* op, int layer,
              KernelShape shape) const {
    KernelParams kp{std::move(shape), m_.precision};
    validate(kp);
    trace.push_back({fp.phase, op, layer, std::move(kp)});
  }

  void allreduce(KernelTrace& trace, const ForwardPass& fp, int layer, Count bytes) const {
    if (p_.tp > 1) trace.push_back({fp.phase, "allreduce", layer, CommCall{Collective::AllReduce, p_.tp, bytes}});
  }

  const ModelConfig& m_;
  const ParallelConfig& p_;
  const PhasePlan& plan_;
  Count heads_ = 0;
  Count kv_heads_ = 0;
  Count inter_ = 0;
  std::vector<Count> stage_ends_;  // last layer index of every stage but the final one
};

std::string cache_key(const KernelParams& kp) {
  return std::string(to_string(kp.category())) + "/" + std::string(to_string(kp.precision)) + "/" +
         params_to_json(kp).dump();
}

}  // namespace

void ModelConfig::validate() const {
  auto positive = [](Count v, const char* what) {
    if (v < 1) throw Error(std::string("model config: ") + what + " must be >= 1");
  };
  positive(num_layers, "num_layers");
  positive(hidden_size, "hidden_size");
  positive(num_heads, "num_heads");
  positive(num_kv_heads, "num_kv_heads");
  positive(head_dim, "head_dim");
  positive(intermediate_size, "intermediate_size");
  positive(vocab_size, "vocab_size");
  if (hidden_size != num_heads * head_dim) {
    throw Error("model config: hidden_size must equal num_heads * head_dim");
  }
  if (num_heads % num_kv_heads != 0) throw Error("model config: num_kv_heads must divide num_heads");
  if (moe) {
    positive(moe->experts, "moe.experts");
    positive(moe->topk, "moe.topk");
    if (moe->topk > moe->experts) throw Error("model config: moe.topk exceeds moe.experts");
  }
}

ModelConfig ModelConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error("model config must be a JSON object");
  ModelConfig m;
  m.name = j.value("name", std::string{});
  m.num_layers = get_count(j, "num_layers");
  m.hidden_size = get_count(j, "hidden_size");
  m.num_heads = get_count(j, "num_heads");
  m.num_kv_heads = get_count(j, "num_kv_heads");
  m.head_dim = get_count(j, "head_dim");
  m.intermediate_size = get_count(j, "intermediate_size");
  m.vocab_size = get_count(j, "vocab_size");
  if (j.contains("moe") && !j["moe"].is_null()) {
    m.moe = MoeConfig{get_count(j["moe"], "experts"), get_count(j["moe"], "topk")};
  }
  if (j.contains("precision")) m.precision = parse_precision(j["precision"].get<std::string>());
  m.validate();
  return m;
}

ModelConfig ModelConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

json ModelConfig::to_json() const {
  json j{{"name", name},
         {"num_layers", num_layers},
         {"hidden_size", hidden_size},
         {"num_heads", num_heads},
         {"num_kv_heads", num_kv_heads},
         {"head_dim", head_dim},
         {"intermediate_size", intermediate_size},
         {"vocab_size", vocab_size},
         {"precision", to_string(precision)}};
  if (moe) j["moe"] = {{"experts", moe->experts}, {"topk", moe->topk}};
  return j;
}

std::string_view to_string(Collective c) {
  return c == Collective::AllReduce ? "allreduce" : "sendrecv";
}

Collective parse_collective(std::string_view s) {
  if (s == "allreduce") return Collective::AllReduce;
  if (s == "sendrecv") return Collective::SendRecv;
  throw Error("unknown collective '" + std::string(s) + "'");
}

std::string Invocation::kind() const {
  if (const auto* c = std::get_if<CommCall>(&call)) return std::string(to_string(c->collective));
  return std::string(to_string(std::get<KernelParams>(call).category()));
}

std::vector<Count> stage_layers(Count num_layers, int pp) {
  if (pp < 1) throw Error("pipeline parallel degree must be >= 1");
  if (num_layers < pp) throw Error("pipeline parallel degree exceeds the number of layers");
  std::vector<Count> out(static_cast<std::size_t>(pp), num_layers / pp);
  for (Count s = 0; s < num_layers % pp; ++s) ++out[static_cast<std::size_t>(s)];
  return out;
}

KernelTrace generate_trace(const ModelConfig& m, const ParallelConfig& p,
                           const std::vector<Request>& batch, const PhasePlan& plan) {
  m.validate();
  if (batch.empty()) throw Error("request batch is empty");
  if (p.tp < 1) throw Error("tensor parallel degree must be >= 1");
  if (m.num_heads % p.tp != 0) throw Error("tensor parallel degree must divide num_heads");
  if (m.intermediate_size % p.tp != 0) throw Error("tensor parallel degree must divide intermediate_size");
  if (m.vocab_size % p.tp != 0) throw Error("tensor parallel degree must divide vocab_size");
  Count max_out = 0;
  for (const auto& r : batch) {
    if (r.input_len < 1 || r.output_len < 0) throw Error("requests need input_len >= 1 and output_len >= 0");
    max_out = std::max(max_out, r.output_len);
  }
  const TraceBuilder builder(m, p, plan);

  KernelTrace trace;
  if (plan.prefill) {
    ForwardPass fp{"prefill", {}, {}};
    for (const auto& r : batch) {
      fp.qlens.push_back(r.input_len);
      fp.kvlens.push_back(r.input_len);
    }
    builder.emit(fp, trace);
  }
  const Count steps = plan.decode_steps.value_or(max_out);
  for (Count k = 1; k <= steps; ++k) {
    ForwardPass fp{"decode-" + std::to_string(k), {}, {}};
    for (const auto& r : batch) {
      if (plan.decode_steps || r.output_len >= k) {
        fp.qlens.push_back(1);
        fp.kvlens.push_back(r.input_len + k);
      }
    }
    if (!fp.qlens.empty()) builder.emit(fp, trace);
  }
  return trace;
}

json to_json(const Invocation& inv) {
  json j{{"phase", inv.phase}, {"op", inv.op}, {"layer", inv.layer}};
  if (const auto* c = std::get_if<CommCall>(&inv.call)) {
    j["collective"] = to_string(c->collective);
    j["world_size"] = c->world_size;
    j["bytes"] = c->bytes;
  } else {
    const auto& kp = std::get<KernelParams>(inv.call);
    j["kernel"] = to_string(kp.category());
    j["precision"] = to_string(kp.precision);
    j["params"] = params_to_json(kp);
  }
  return j;
}

Invocation invocation_from_json(const json& j) {
  try {
    Invocation inv;
    inv.phase = j.at("phase").get<std::string>();
    inv.op = j.at("op").get<std::string>();
    inv.layer = j.value("layer", -1);
    if (j.contains("collective")) {
      inv.call = CommCall{parse_collective(j.at("collective").get<std::string>()),
                          j.at("world_size").get<int>(), j.at("bytes").get<Count>()};
    } else {
      const KernelCategory c = parse_category(j.at("kernel").get<std::string>());
      std::optional<Precision> prec;
      if (j.contains("precision")) prec = parse_precision(j.at("precision").get<std::string>());
      KernelParams kp = params_from_json(c, j.at("params"), prec);
      validate(kp);
      inv.call = std::move(kp);
    }
    return inv;
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed trace entry: ") + ex.what());
  }
}

void write_trace(std::ostream& out, const KernelTrace& trace) {
  for (const auto& inv : trace) out << to_json(inv).dump() << '\n';
}

KernelTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  KernelTrace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(invocation_from_json(json::parse(line)));
    } catch (const json::exception& ex) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const Error& ex) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return trace;
}

CommModel::CommModel(std::vector<CommTable> tables) : tables_(std::move(tables)) {
  for (const auto& t : tables_) {
    const std::string name = std::string(to_string(t.collective)) + "/" + std::to_string(t.world_size) + "/" + t.link;
    if (t.points.empty()) throw Error("comm table " + name + " has no points");
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto [b, us] = t.points[i];
      if (!(b > 0.0) || !(us >= 0.0)) throw Error("comm table " + name + ": bytes must be > 0, latency >= 0");
      if (i > 0 && !(b > t.points[i - 1].first)) throw Error("comm table " + name + ": bytes must increase");
      if (i > 0 && us < t.points[i - 1].second) throw Error("comm table " + name + ": latency must not decrease");
    }
  }
}

CommModel CommModel::from_json(const json& j) {
  std::vector<CommTable> tables;
  try {
    for (const auto& tj : j.at("tables")) {
      CommTable t;
      t.collective = parse_collective(tj.at("collective").get<std::string>());
      t.world_size = tj.at("world_size").get<int>();
      t.link = tj.at("link").get<std::string>();
      for (const auto& pt : tj.at("points")) t.points.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
      tables.push_back(std::move(t));
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed comm model: ") + ex.what());
  }
  return CommModel(std::move(tables));
}

CommModel CommModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
}

json CommModel::to_json() const {
  json tables = json::array();
  for (const auto& t : tables_) {
    json pts = json::array();
    for (const auto& [b, us] : t.points) pts.push_back({b, us});
    tables.push_back({{"collective", to_string(t.collective)},
                      {"world_size", t.world_size},
                      {"link", t.link},
                      {"points", pts}});
  }
  return {{"tables", tables}};
}

const CommTable& CommModel::table(Collective c, int world_size, const std::string& link) const {
  for (const auto& t : tables_) {
    if (t.collective == c && t.world_size == world_size && t.link == link) return t;
  }
  throw Error("no comm table for " + std::string(to_string(c)) + " world_size " +
              std::to_string(world_size) + " on link '" + link + "'");
}

double predict_comm(const CommModel& cm, Collective c, int world_size, double bytes,
                    const std::string& link) {
  const auto& pts = cm.table(c, world_size, link).points;
  if (bytes <= pts.front().first) return pts.front().second;
  if (bytes >= pts.back().first) return pts.back().second;
  const auto hi = std::upper_bound(pts.begin(), pts.end(), bytes,
                                   [](double b, const auto& p) { return b < p.first; });
  const auto lo = hi - 1;
  if (lo->first == bytes) return lo->second;
  const double t = (std::log(bytes) - std::log(lo->first)) / (std::log(hi->first) - std::log(lo->first));
  return lo->second + t * (hi->second - lo->second);
}

CommTable alpha_beta_table(Collective c, int world_size, const std::string& link, double alpha_us,
                           double bw_gbps, double min_bytes, double max_bytes) {
  if (world_size < 2) throw Error("collectives need world_size >= 2");
  if (!(alpha_us >= 0.0) || !(bw_gbps > 0.0) || !(min_bytes > 0.0) || max_bytes < min_bytes) {
    throw Error("invalid alpha-beta parameters");
  }
  CommTable t{c, world_size, link, {}};
  const double w = world_size;
  for (double b = min_bytes; b <= max_bytes; b *= 2.0) {
    const double transfer_us = b / (bw_gbps * 1e3);
    const double us = c == Collective::AllReduce
                          ? 2.0 * (w - 1.0) * alpha_us + 2.0 * (w - 1.0) / w * transfer_us
                          : alpha_us + transfer_us;
    t.points.emplace_back(b, us);
  }
  return t;
}

// Shewchuk-style exact partials with a correctly rounded final sum.
double exact_sum(std::span<const double> values) {
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  if (partials.empty()) return 0.0;
  std::size_t n = partials.size() - 1;
  double hi = partials[n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

E2EResult predict_e2e(const KernelTrace& trace, const E2EContext& ctx) {
  if (!ctx.estimators || !ctx.hw || !ctx.tiling) throw Error("e2e prediction needs estimators, hardware and tiling");
  E2EResult r;
  std::unordered_map<std::string, double> memo;
  std::vector<double> all, compute, comm;
  std::map<std::string, std::vector<double>> by_kind;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const Invocation& inv = trace[i];
    double us = 0.0;
    if (const auto* c = std::get_if<CommCall>(&inv.call)) {
      if (!ctx.comm) throw Error("trace has communication but no comm model was given");
      us = predict_comm(*ctx.comm, c->collective, c->world_size, static_cast<double>(c->bytes), ctx.link);
      comm.push_back(us);
    } else {
      const auto& kp = std::get<KernelParams>(inv.call);
      const auto it = ctx.estimators->find(kp.category());
      if (it == ctx.estimators->end()) {
        throw Error("no estimator for " + std::string(to_string(kp.category())) + " kernels");
      }
      const std::string key = cache_key(kp);
      auto m = memo.find(key);
      if (m == memo.end()) m = memo.emplace(key, predict(it->second, kp, *ctx.hw, *ctx.tiling).latency_us).first;
      us = m->second;
      compute.push_back(us);
    }
    all.push_back(us);
    by_kind[inv.kind()].push_back(us);
    r.breakdown.push_back({i, inv.phase, inv.op, inv.kind(), us});
  }
  r.total_us = exact_sum(all);
  r.compute_us = exact_sum(compute);
  r.comm_us = exact_sum(comm);
  for (const auto& [kind, v] : by_kind) r.shares[kind] = r.total_us > 0.0 ? exact_sum(v) / r.total_us : 0.0;
  return r;
}

void write_breakdown_csv(std::ostream& out, const E2EResult& r) {
  out << "index,phase,op,kind,latency_us\n";
  for (const auto& e : r.breakdown) {
    out << e.index << ',' << e.phase << ',' << e.op << ',' << e.kind << ',' << json(e.latency_us).dump() << '\n';
  }
}

json to_json(const E2EResult& r) {
  json shares = json::object();
  for (const auto& [k, v] : r.shares) shares[k] = v;
  return {{"total_us", r.total_us},
          {"compute_us", r.compute_us},
          {"comm_us", r.comm_us},
          {"invocations", r.breakdown.size()},
          {"shares", shares}};
}

}  // namespace gpuperf
