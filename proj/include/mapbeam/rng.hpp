// SPDX-License-Identifier: Apache-2.0
//
// mapbeam — movable-antenna placement and dual-function beamforming
// Copyright (C) 2026 mapbeam contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef mapbeam_rng_H
#define mapbeam_rng_H

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mapb
{
    // Deterministic random number generator.
    //
    // The standard library's distribution objects (std::normal_distribution,
    // std::uniform_real_distribution, ...) are implementation-defined, so two
    // standard libraries can produce different streams from the same engine.
    // Reproducibility across toolchains is a hard requirement here (identical
    // seeds must give byte-identical result files), so the transforms from raw
    // engine output to variates are spelled out explicitly. Only the mt19937_64
    // engine itself is taken from <random>; its output sequence is fixed by the
    // C++ standard.
    class Rng
    {
      public:
        explicit Rng(std::uint64_t seed) : engine(seed) {}

        // Uniform double in [0, 1) with 53 random bits.
        double uniform()
        {
            return static_cast<double>(engine() >> 11) * 0x1.0p-53;
        }

        // Uniform double in [lo, hi).
        double uniform(double lo, double hi)
        {
            return lo + (hi - lo) * uniform();
        }

        // Standard normal via Box-Muller. Draws two uniforms on every other
        // call and caches the second variate, so the stream is a fixed
        // function of the call sequence.
        double normal()
        {
            if (has_spare)
            {
                has_spare = false;
                return spare;
            }
            double u1 = uniform();
            double u2 = uniform();
            // Avoid log(0): the smallest u1 is 0, shift into (0, 1].
            double r = std::sqrt(-2.0 * std::log(1.0 - u1));
            double a = 2.0 * 3.14159265358979323846 * u2;
            spare = r * std::sin(a);
            has_spare = true;
            return r * std::cos(a);
        }

        // Circularly-symmetric complex Gaussian CN(0, variance):
        // real and imaginary parts are independent N(0, variance/2).
        std::complex<double> complex_normal(double variance)
        {
            double s = std::sqrt(variance / 2.0);
            double re = normal();
            double im = normal();
            return {s * re, s * im};
        }

        // Exponential variate with the given mean (inverse-CDF transform).
        double exponential(double mean)
        {
            return -mean * std::log(1.0 - uniform());
        }

        // Uniform integer in [0, n).
        std::uint64_t uniform_index(std::uint64_t n)
        {
            // Rejection-free modulo is biased for large n; n here is always
            // tiny (grid sizes), so floor(u*n) on 53 bits is exact enough and
            // deterministic.
            auto idx = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
            return idx < n ? idx : n - 1;
        }

        // Independent child stream i derived from this stream's seed; used to
        // give parallel tasks (seeds, Monte-Carlo cells) their own streams.
        static Rng child(std::uint64_t seed, std::uint64_t stream)
        {
            // splitmix64 on the combined word decorrelates nearby seeds.
            std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            z = z ^ (z >> 31);
            return Rng(z);
        }

      private:
        std::mt19937_64 engine;
        double spare = 0.0;
        bool has_spare = false;
    };

} // namespace mapb

#endif
