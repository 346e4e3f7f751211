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

#ifndef POLYMM_PIPELINE_H_
#define POLYMM_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polymm/mac_engine.h"
#include "polymm/negacyclic_matrix.h"
#include "polymm/ring.h"
#include "polymm/rns.h"

namespace polymm {

// Everything needed to run one ring's products on the engine. Construct
// through gen_config or make_config, which verify:
//   M > n * q^2, n * (max m_i - 1)^2 <= 2^accumulator_bits - 1,
//   plan.n == n, and max m_i < 2^input_bits.
struct PipelineConfig {
  RingParams ring;
  RnsBase base;
  BlockPlan plan;
  EngineConfig engine_cfg;
  Backend backend = Backend::kSystolic;

  // Throws kConfiguration naming the first bound that fails.
  void validate() const;
  // Sorted-key JSON with q as a decimal string and the moduli list.
  std::string canonical_json() const;
  // FNV-1a 64 of canonical_json().
  std::uint64_t fingerprint() const;
};

inline constexpr std::size_t kDefaultBlockCap = 1024;

struct GenConfigOptions {
  unsigned word_bits = 8;
  std::size_t block_cap = kDefaultBlockCap;  // largest block_dim considered
  Backend backend = Backend::kSystolic;
};

// Base from select_rns_base with accumulation length n. block_dim is
// min(n, largest power-of-two multiple of tile_dim not above block_cap); a
// tile_dim above the cap is used as is. Partitioning needs power-of-two n;
// any other n is accepted only when it fits a single block.
PipelineConfig gen_config(const RingParams& ring, const EngineConfig& hw,
                          const GenConfigOptions& options = {});
PipelineConfig gen_config(const RingParams& ring, const EngineConfig& hw, unsigned word_bits);

PipelineConfig make_config(RingParams ring, RnsBase base, BlockPlan plan, EngineConfig engine_cfg,
                           Backend backend = Backend::kSystolic);

// Stable 64-bit hash of (n, q, coefficients).
std::uint64_t polynomial_hash(const Polynomial& p);

// The converted fixed operand: one tiled residue matrix per modulus, entry
// (r, c) of channel i equal to build_matrix(b)(r, c) mod m_i.
class NegacyclicOperand {
 public:
  NegacyclicOperand(std::uint64_t source_hash, std::uint64_t config_fingerprint,
                    std::vector<TiledMatrix> channels)
      : source_hash_(source_hash),
        config_fingerprint_(config_fingerprint),
        channels_(std::move(channels)) {}

  std::uint64_t source_hash() const { return source_hash_; }
  std::uint64_t config_fingerprint() const { return config_fingerprint_; }
  std::size_t num_channels() const { return channels_.size(); }
  const TiledMatrix& channel(std::size_t i) const { return channels_[i]; }

 private:
  std::uint64_t source_hash_;
  std::uint64_t config_fingerprint_;
  std::vector<TiledMatrix> channels_;
};

NegacyclicOperand convert_operand_b(const Polynomial& b, const PipelineConfig& cfg);

// One 1 x n residue row per modulus.
std::vector<InputMatrix> convert_operand_a(const Polynomial& a, const PipelineConfig& cfg);
// One batch x n residue matrix per modulus, row j holding batch[j].
std::vector<InputMatrix> convert_batch(std::span<const Polynomial> batch, const PipelineConfig& cfg);

struct PipelineStats {
  EngineStats total;
  std::vector<EngineStats> per_modulus;
};

struct ExecutionOptions {
  // Run residue channels on worker threads. Results do not depend on it.
  bool parallel_channels = false;
  std::size_t max_threads = 0;  // 0: hardware concurrency
  // Test hook: corrupt the first residue of channel 0 before reconstruction.
  bool inject_fault = false;
};

// Per modulus: blocked engine product, each accumulated dot product reduced
// mod m_i; then per coefficient CRT to the exact sum S in [0, n q^2) and
// S mod q.
Polynomial pipeline_mul(const Polynomial& a, const NegacyclicOperand& b, const PipelineConfig& cfg,
                        PipelineStats* stats = nullptr, const ExecutionOptions& options = {});

// One engine product per modulus for the whole batch.
std::vector<Polynomial> pipeline_batch_mul(std::span<const Polynomial> batch,
                                           const NegacyclicOperand& b, const PipelineConfig& cfg,
                                           PipelineStats* stats = nullptr,
                                           const ExecutionOptions& options = {});

// pipeline_mul without a cached operand: each residue tile of b is built just
// before it is dispatched. Used where n^2 * k words will not fit in memory.
Polynomial pipeline_mul_streaming(const Polynomial& a, const Polynomial& b,
                                  const PipelineConfig& cfg, PipelineStats* stats = nullptr,
                                  const ExecutionOptions& options = {});

// Converted operands keyed by (polynomial hash, config fingerprint). Entries
// stay until the caller erases them. Safe for concurrent use.
class OperandCache {
 public:
  std::shared_ptr<const NegacyclicOperand> get_or_convert(const Polynomial& b,
                                                          const PipelineConfig& cfg);
  bool contains(const Polynomial& b, const PipelineConfig& cfg) const;
  bool erase(const Polynomial& b, const PipelineConfig& cfg);
  void clear();
  std::size_t size() const;
  std::size_t conversions() const;

 private:
  struct Entry {
    Polynomial source;
    std::shared_ptr<const NegacyclicOperand> operand;
  };
  using Key = std::pair<std::uint64_t, std::uint64_t>;

  mutable std::mutex mu_;
  std::map<Key, std::vector<Entry>> entries_;
  std::size_t conversions_ = 0;
};

// Config file (JSON):
//   n, q (decimal string), word_bits, tile_dim, input_bits, accumulator_bits,
//   block_cap, backend, optional moduli (list) and block_dim.
// input_bits defaults to word_bits; accumulator_bits to 32 for word_bits <= 8
// and 64 otherwise. With `moduli` present the base is taken from the file
// (product and CRT constants recomputed), otherwise selected greedily.
PipelineConfig load_config_json(const std::string& text);
PipelineConfig load_config_file(const std::string& path);

}  // namespace polymm

#endif  // POLYMM_PIPELINE_H_
