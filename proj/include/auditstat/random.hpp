// Copyright 2026 The auditstat Authors
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


#ifndef AUDITSTAT_RANDOM_HPP_
#define AUDITSTAT_RANDOM_HPP_

#include <cstdint>
#include <cstddef>
#include <span>

namespace auditstat {

// SplitMix64 (Steele, Lea & Flood 2014). The whole stream is defined by
// integer arithmetic mod 2^64, so draws are identical on every platform.
// Independent substreams are keyed by hashing (seed, key...) into a start
// state, which lets generation be addressed per product instead of by
// position in a single sequence.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return v % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index drawn with probability proportional to weights (assumed
  // non-negative with a positive sum).
  std::size_t categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    // Rounding: fall back to the last positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return i;
    }
    return 0;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static SplitMix64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t h = mix(seed ^ 0x6A09E667F3BCC909ULL);
    h = mix(h ^ (a + 0x9E3779B97F4A7C15ULL));
    h = mix(h ^ (b + 0xBB67AE8584CAA73BULL));
    h = mix(h ^ (c + 0x3C6EF372FE94F82BULL));
    return SplitMix64(h);
  }

 private:
  std::uint64_t state_;
};

}  // namespace auditstat

#endif  // AUDITSTAT_RANDOM_HPP_
