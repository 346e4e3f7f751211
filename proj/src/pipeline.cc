// Copyright 2026 The polymm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "polymm/pipeline.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "polymm/error.h"

namespace polymm {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::size_t pick_block_dim(std::size_t n, std::size_t tile_dim, std::size_t cap) {
  std::size_t dim = tile_dim;
  while (dim * 2 <= cap) dim *= 2;
  if (!is_power_of_two(n) && n > dim) {
    throw Error(ErrorCode::kConfiguration,
                "n = " + std::to_string(n) + " exceeds one block and is not a power of two");
  }
  return std::min(n, dim);
}

u128 to_u128(const BigInt& v) {
  const auto lo = static_cast<std::uint64_t>(v & BigInt(~std::uint64_t{0}));
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  return (static_cast<u128>(hi) << 64) | lo;
}

// residues[i][j] = values[j] mod m_i.
std::vector<std::vector<std::uint32_t>> residue_table(std::span<const BigInt> values,
                                                      const RnsBase& base) {
  std::vector<std::vector<std::uint32_t>> out(base.size(),
                                              std::vector<std::uint32_t>(values.size()));
  for (std::size_t j = 0; j < values.size(); ++j) {
    const BigInt& v = values[j];
    if (bit_length(v) <= 128) {
      const u128 w = to_u128(v);
      for (std::size_t i = 0; i < base.size(); ++i) {
        out[i][j] = static_cast<std::uint32_t>(w % base.modulus(i));
      }
    } else {
      for (std::size_t i = 0; i < base.size(); ++i) {
        out[i][j] = static_cast<std::uint32_t>(v % base.modulus(i));
      }
    }
  }
  return out;
}

// For each channel, ext of length 2n with ext[n + j] = b_j mod m_i and
// ext[j] = (-b_j mod q) mod m_i, so matrix entry (r, c) is ext[n + c - r].
std::vector<std::vector<std::uint32_t>> extended_residues(const Polynomial& b,
                                                          const RnsBase& base) {
  const std::size_t n = b.size();
  const BigInt& q = b.params().q;
  std::vector<BigInt> values(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    values[n + j] = b[j];
    values[j] = b[j] == 0 ? BigInt(0) : BigInt(q - b[j]);
  }
  return residue_table(values, base);
}

void fill_tile(std::span<const std::uint32_t> ext, std::size_t n, std::size_t bd, std::size_t bi,
               std::size_t bj, std::uint32_t* out) {
  for (std::size_t rr = 0; rr < bd; ++rr) {
    const std::size_t r = bi * bd + rr;
    const std::uint32_t* src = ext.data() + (n + bj * bd - r);
    out = std::copy(src, src + bd, out);
  }
}

void check_ring(const Polynomial& p, const PipelineConfig& cfg) {
  if (!(p.params() == cfg.ring)) {
    throw Error(ErrorCode::kParameterMismatch, "polynomial ring does not match the pipeline config");
  }
}

template <typename Fn>
void for_each_channel(std::size_t channels, const ExecutionOptions& options, Fn fn) {
  std::size_t threads = options.max_threads != 0 ? options.max_threads
                                                 : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, channels);
  if (!options.parallel_channels || threads <= 1) {
    for (std::size_t i = 0; i < channels; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < channels; i = next++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

using TileSourceFactory = std::function<TileSource(std::size_t channel)>;

// Runs every channel and reconstructs rows x n output polynomials.
std::vector<Polynomial> run_channels(const std::vector<InputMatrix>& inputs,
                                     const TileSourceFactory& tiles_for, const PipelineConfig& cfg,
                                     PipelineStats* stats, const ExecutionOptions& options) {
  const std::size_t k = cfg.base.size();
  const std::size_t n = cfg.ring.n;
  const std::size_t rows = inputs.front().rows;
  const auto engine = make_engine(cfg.backend, cfg.engine_cfg);

  std::vector<std::vector<std::uint64_t>> residues(k);
  std::vector<EngineStats> channel_stats(k);
  for_each_channel(k, options, [&](std::size_t i) {
    BlockedProduct product = blocked_matmul(inputs[i], cfg.plan, tiles_for(i), *engine);
    const std::uint64_t m = cfg.base.modulus(i);
    auto& out = residues[i];
    out.resize(rows * n);
    for (std::size_t j = 0; j < rows * n; ++j) out[j] = product.sums.data[j] % m;
    channel_stats[i] = product.stats;
  });
  if (options.inject_fault && rows > 0) {
    residues[0][0] = (residues[0][0] + 1) % cfg.base.modulus(0);
  }

  if (stats != nullptr) {
    stats->total = EngineStats{};
    for (const auto& s : channel_stats) stats->total += s;
    stats->per_modulus = std::move(channel_stats);
  }

  std::vector<Polynomial> results;
  results.reserve(rows);
  std::vector<std::uint64_t> gathered(k);
  const BigInt& q = cfg.ring.q;
  const bool wide = cfg.base.has_wide_path();
  const u128 q_wide = wide ? to_u128(q) : 0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<BigInt> coeffs(n);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t i = 0; i < k; ++i) gathered[i] = residues[i][r * n + c];
      if (wide) {
        coeffs[c] = from_u128(cfg.base.reconstruct_wide(gathered) % q_wide);
      } else {
        coeffs[c] = crt_reconstruct(gathered, cfg.base) % q;
      }
    }
    results.emplace_back(cfg.ring, std::move(coeffs));
  }
  return results;
}

}  // namespace

void PipelineConfig::validate() const {
  engine_cfg.validate();
  const BigInt bound = BigInt(ring.n) * ring.q * ring.q;
  if (!(base.product() > bound)) {
    throw Error(ErrorCode::kConfiguration,
                "RNS product " + to_decimal(base.product()) + " does not exceed n*q^2 = " +
                    to_decimal(bound));
  }
  const std::uint64_t top = base.max_modulus() - 1;
  const BigInt worst = BigInt(ring.n) * top * top;
  const BigInt acc_max = (BigInt(1) << engine_cfg.accumulator_bits) - 1;
  if (worst > acc_max) {
    throw Error(ErrorCode::kConfiguration,
                "n*(max modulus - 1)^2 = " + to_decimal(worst) + " exceeds the " +
                    std::to_string(engine_cfg.accumulator_bits) + "-bit accumulator");
  }
  if (plan.n != ring.n) {
    throw Error(ErrorCode::kConfiguration, "block plan n " + std::to_string(plan.n) +
                                               " differs from ring n " + std::to_string(ring.n));
  }
  if (base.max_modulus() >= (std::uint64_t{1} << engine_cfg.input_bits)) {
    throw Error(ErrorCode::kConfiguration,
                "modulus " + std::to_string(base.max_modulus()) + " does not fit " +
                    std::to_string(engine_cfg.input_bits) + "-bit engine inputs");
  }
}

std::string PipelineConfig::canonical_json() const {
  nlohmann::json j;
  j["n"] = ring.n;
  j["q"] = to_decimal(ring.q);
  j["word_bits"] = base.word_bits();
  j["moduli"] = std::vector<std::uint64_t>(base.moduli().begin(), base.moduli().end());
  j["block_dim"] = plan.block_dim;
  j["tile_dim"] = engine_cfg.tile_dim;
  j["input_bits"] = engine_cfg.input_bits;
  j["accumulator_bits"] = engine_cfg.accumulator_bits;
  j["backend"] = std::string(backend_name(backend));
  return j.dump();
}

std::uint64_t PipelineConfig::fingerprint() const { return fnv1a(canonical_json()); }

PipelineConfig make_config(RingParams ring, RnsBase base, BlockPlan plan, EngineConfig engine_cfg,
                           Backend backend) {
  PipelineConfig cfg{std::move(ring), std::move(base), plan, engine_cfg, backend};
  cfg.validate();
  return cfg;
}

PipelineConfig gen_config(const RingParams& ring, const EngineConfig& hw,
                          const GenConfigOptions& options) {
  hw.validate();
  std::optional<RnsBase> base;
  try {
    base = select_rns_base(RnsSelectionParams{ring.q, ring.n, options.word_bits});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBaseTooSmall) throw;
    throw Error(ErrorCode::kConfiguration, std::string("bound n*q^2 unreachable: ") + e.message());
  }
  const BlockPlan plan =
      make_block_plan(ring.n, pick_block_dim(ring.n, hw.tile_dim, options.block_cap));
  return make_config(ring, std::move(*base), plan, hw, options.backend);
}

PipelineConfig gen_config(const RingParams& ring, const EngineConfig& hw, unsigned word_bits) {
  GenConfigOptions options;
  options.word_bits = word_bits;
  return gen_config(ring, hw, options);
}

std::uint64_t polynomial_hash(const Polynomial& p) {
  std::uint64_t h = fnv1a(std::to_string(p.params().n) + " " + to_decimal(p.params().q) + ":");
  for (const BigInt& c : p.coeffs()) h = fnv1a(to_decimal(c) + ",", h);
  return h;
}

NegacyclicOperand convert_operand_b(const Polynomial& b, const PipelineConfig& cfg) {
  check_ring(b, cfg);
  const std::size_t n = cfg.ring.n;
  const std::size_t bd = cfg.plan.block_dim;
  const auto ext = extended_residues(b, cfg.base);
  std::vector<TiledMatrix> channels;
  channels.reserve(cfg.base.size());
  for (std::size_t i = 0; i < cfg.base.size(); ++i) {
    std::vector<std::uint32_t> data(n * n);
    for (std::size_t bi = 0; bi < cfg.plan.grid; ++bi) {
      for (std::size_t bj = 0; bj < cfg.plan.grid; ++bj) {
        fill_tile(ext[i], n, bd, bi, bj, data.data() + (bi * cfg.plan.grid + bj) * bd * bd);
      }
    }
    channels.emplace_back(cfg.plan, std::move(data));
  }
  return NegacyclicOperand(polynomial_hash(b), cfg.fingerprint(), std::move(channels));
}

std::vector<InputMatrix> convert_batch(std::span<const Polynomial> batch, const PipelineConfig& cfg) {
  const std::size_t n = cfg.ring.n;
  std::vector<InputMatrix> out(cfg.base.size(), InputMatrix(batch.size(), n));
  for (std::size_t r = 0; r < batch.size(); ++r) {
    check_ring(batch[r], cfg);
    const auto table = residue_table(batch[r].coeffs(), cfg.base);
    for (std::size_t i = 0; i < cfg.base.size(); ++i) {
      std::copy(table[i].begin(), table[i].end(), out[i].data.begin() + r * n);
    }
  }
  return out;
}

std::vector<InputMatrix> convert_operand_a(const Polynomial& a, const PipelineConfig& cfg) {
  return convert_batch(std::span<const Polynomial>(&a, 1), cfg);
}

std::vector<Polynomial> pipeline_batch_mul(std::span<const Polynomial> batch,
                                           const NegacyclicOperand& b, const PipelineConfig& cfg,
                                           PipelineStats* stats, const ExecutionOptions& options) {
  if (b.config_fingerprint() != cfg.fingerprint() || b.num_channels() != cfg.base.size()) {
    throw Error(ErrorCode::kParameterMismatch, "operand was converted under a different config");
  }
  if (batch.empty()) {
    if (stats != nullptr) *stats = PipelineStats{EngineStats{}, std::vector<EngineStats>(cfg.base.size())};
    return {};
  }
  const auto inputs = convert_batch(batch, cfg);
  return run_channels(
      inputs,
      [&b](std::size_t i) -> TileSource {
        const TiledMatrix& m = b.channel(i);
        return [&m](std::size_t bi, std::size_t bj) { return m.tile(bi, bj); };
      },
      cfg, stats, options);
}

Polynomial pipeline_mul(const Polynomial& a, const NegacyclicOperand& b, const PipelineConfig& cfg,
                        PipelineStats* stats, const ExecutionOptions& options) {
  return std::move(pipeline_batch_mul(std::span<const Polynomial>(&a, 1), b, cfg, stats, options).front());
}

Polynomial pipeline_mul_streaming(const Polynomial& a, const Polynomial& b,
                                  const PipelineConfig& cfg, PipelineStats* stats,
                                  const ExecutionOptions& options) {
  check_ring(a, cfg);
  check_ring(b, cfg);
  const std::size_t n = cfg.ring.n;
  const std::size_t bd = cfg.plan.block_dim;
  const auto ext = extended_residues(b, cfg.base);
  const auto inputs = convert_operand_a(a, cfg);
  return std::move(run_channels(
                       inputs,
                       [&](std::size_t i) -> TileSource {
                         auto scratch = std::make_shared<std::vector<std::uint32_t>>(bd * bd);
                         return [&, i, scratch](std::size_t bi, std::size_t bj) {
                           fill_tile(ext[i], n, bd, bi, bj, scratch->data());
                           return InputView(scratch->data(), bd, bd, bd);
                         };
                       },
                       cfg, stats, options)
                       .front());
}

std::shared_ptr<const NegacyclicOperand> OperandCache::get_or_convert(const Polynomial& b,
                                                                      const PipelineConfig& cfg) {
  const Key key{polynomial_hash(b), cfg.fingerprint()};
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      for (const Entry& e : it->second) {
        if (e.source == b) return e.operand;
      }
    }
  }
  auto operand = std::make_shared<const NegacyclicOperand>(convert_operand_b(b, cfg));
  std::lock_guard lock(mu_);
  auto& bucket = entries_[key];
  for (const Entry& e : bucket) {
    if (e.source == b) return e.operand;
  }
  bucket.push_back(Entry{b, operand});
  ++conversions_;
  return operand;
}

bool OperandCache::contains(const Polynomial& b, const PipelineConfig& cfg) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(Key{polynomial_hash(b), cfg.fingerprint()});
  if (it == entries_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const Entry& e) { return e.source == b; });
}

bool OperandCache::erase(const Polynomial& b, const PipelineConfig& cfg) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(Key{polynomial_hash(b), cfg.fingerprint()});
  if (it == entries_.end()) return false;
  auto& bucket = it->second;
  const auto before = bucket.size();
  std::erase_if(bucket, [&](const Entry& e) { return e.source == b; });
  const bool removed = bucket.size() != before;
  if (bucket.empty()) entries_.erase(it);
  return removed;
}

void OperandCache::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

std::size_t OperandCache::size() const {
  std::lock_guard lock(mu_);
  std::size_t total = 0;
  for (const auto& [key, bucket] : entries_) total += bucket.size();
  return total;
}

std::size_t OperandCache::conversions() const {
  std::lock_guard lock(mu_);
  return conversions_;
}

PipelineConfig load_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    const auto n = j.at("n").get<std::size_t>();
    const BigInt q = parse_decimal(j.at("q").is_string() ? j.at("q").get<std::string>()
                                                           : j.at("q").dump());
    const unsigned word_bits = j.value("word_bits", 8u);
    EngineConfig hw;
    hw.tile_dim = j.value("tile_dim", std::size_t{128});
    hw.input_bits = j.value("input_bits", word_bits);
    hw.accumulator_bits = j.value("accumulator_bits", word_bits <= 8 ? 32u : 64u);
    GenConfigOptions options;
    options.word_bits = word_bits;
    options.block_cap = j.value("block_cap", kDefaultBlockCap);
    options.backend = parse_backend(j.value("backend", std::string("systolic")));
    const RingParams ring(n, q);
    PipelineConfig cfg = j.contains("moduli")
                             ? make_config(ring,
                                           RnsBase(j.at("moduli").get<std::vector<std::uint64_t>>(),
                                                   word_bits),
                                           make_block_plan(n, pick_block_dim(n, hw.tile_dim, options.block_cap)), hw,
                                           options.backend)
                             : gen_config(ring, hw, options);
    if (j.contains("block_dim")) {
      cfg = make_config(cfg.ring, cfg.base, make_block_plan(n, j.at("block_dim").get<std::size_t>()),
                        cfg.engine_cfg, cfg.backend);
    }
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad config field: ") + e.what());
  }
}

PipelineConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParse, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config_json(ss.str());
}

}  // namespace polymm
