// lid/rng.h

// Copyright 2026 The lidnet Authors
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

#ifndef LID_RNG_H_
#define LID_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace lid {

// mt19937 with hand-rolled output mappings. The engine itself is fully
// specified by the standard; the std distributions are not, so we avoid them
// to keep seeded runs reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(static_cast<uint32_t>(seed)) {}

  uint32_t Next() { return gen_(); }

  // Uniform in [0, 1) with 24 bits of mantissa.
  double Uniform() { return (gen_() >> 8) * (1.0 / 16777216.0); }

  double UniformRange(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n]; n must fit comfortably below 2^32.
  uint32_t UniformInt(uint32_t n) {
    // Rejection-free modulo is biased for huge n; n here is mask widths and
    // frame counts, far below the bias threshold that would matter.
    return gen_() % (n + 1);
  }

  // Standard normal via Box-Muller.
  double Gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = Uniform(), u2 = Uniform();
    while (u1 <= 1e-12) u1 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  std::string SerializeState() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void DeserializeState(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
    have_spare_ = false;
  }

 private:
  std::mt19937 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace lid

#endif  // LID_RNG_H_
