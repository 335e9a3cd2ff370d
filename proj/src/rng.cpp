#include "routedet/rng.hpp"

#include <cmath>

namespace routedet {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, const std::string& tag) {
    return splitmix64(splitmix64(root) ^ fnv1a64(tag.data(), tag.size()));
}

std::uint64_t Rng::below(std::uint64_t n) {
    // rejection sampling to avoid modulo bias
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % n;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u clamped away from 0 so log stays finite
    double u = uniform();
    if (u < 1e-300) u = 1e-300;
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    double theta = 2.0 * M_PI * v;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape) {
    // Marsaglia-Tsang squeeze; boost for shape < 1
    if (shape < 1.0) {
        double u = uniform();
        if (u < 1e-300) u = 1e-300;
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 1e-300 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::vector<double> Rng::dirichlet(std::size_t dim, double concentration) {
    std::vector<double> out(dim);
    double sum = 0.0;
    for (auto& g : out) {
        g = gamma(concentration);
        sum += g;
    }
    if (sum <= 0.0) {
        for (auto& g : out) g = 1.0 / static_cast<double>(dim);
        return out;
    }
    for (auto& g : out) g /= sum;
    return out;
}

void Rng::shuffle(std::vector<std::size_t>& idx) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        std::size_t j = below(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

}  // namespace routedet
