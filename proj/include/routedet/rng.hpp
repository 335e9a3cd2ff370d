#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace routedet {

// All stochastic stages derive their stream from one root seed via a named
// split, so partially rerun pipelines stay reproducible. The derivation is
// splitmix64 over (root, fnv1a(tag)), fully specified and platform-stable.
std::uint64_t derive_seed(std::uint64_t root, const std::string& tag);

std::uint64_t fnv1a64(const void* data, std::size_t len);

// Thin wrapper around mt19937_64 that avoids std::*_distribution, whose
// output sequences are implementation-defined. Everything here is built
// from raw engine words so results are bit-identical across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n);

    double normal();
    double gamma(double shape);

    // one draw from a symmetric Dirichlet(concentration) over dim categories
    std::vector<double> dirichlet(std::size_t dim, double concentration);

    // deterministic Fisher-Yates
    void shuffle(std::vector<std::size_t>& idx);

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace routedet
