// Copyright 2026 The HierNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HIERNAS_CORE_RNG_H_
#define HIERNAS_CORE_RNG_H_

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace hiernas {

// All stochastic choices draw from this engine. Its textual state is stored
// in checkpoints, so replays are exact within one build.
using Rng = std::mt19937_64;

// Stream tags for derive_seed. Keeping them distinct makes substreams of the
// same master seed independent of each other.
enum class Stream : std::uint64_t {
  kController = 1,
  kInitPopulation = 2,
  kEvaluation = 3,
  kEvaluationRun = 4,
  kWeights = 5,
  kBatches = 6,
  kDataset = 7,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed splitting rule: splitmix64(splitmix64(master ^ splitmix64(stream)) + index).
inline std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                 std::uint64_t index) {
  const auto tag = splitmix64(static_cast<std::uint64_t>(stream));
  return splitmix64(splitmix64(master ^ tag) + index);
}

inline std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

inline bool restore_rng_state(Rng& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  return !in.fail();
}

// Uniform integer in [lo, hi].
template <class Int>
Int uniform_int(Rng& rng, Int lo, Int hi) {
  return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

}  // namespace hiernas

#endif  // HIERNAS_CORE_RNG_H_
