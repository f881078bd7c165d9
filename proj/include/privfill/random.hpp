//
// Copyright 2026 The PrivFill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PRIVFILL_RANDOM_HPP_
#define PRIVFILL_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace privfill {

// Seedable random source. The engine (mt19937_64) has a fully specified
// output sequence; all derived draws (uniform reals, bounded integers,
// shuffles) are implemented here rather than through the standard
// distributions, whose algorithms differ between library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

// Mixes a job seed with a key (document id, shard name) into a new seed.
std::uint64_t derive_seed(std::uint64_t job_seed, std::string_view key);

// Per-document generator: Rng(derive_seed(job_seed, document_id)).
inline Rng document_rng(std::uint64_t job_seed, std::string_view document_id) {
  return Rng(derive_seed(job_seed, document_id));
}

// Identity permutation [0, n) shuffled with the given seed.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace privfill

#endif  // PRIVFILL_RANDOM_HPP_
