#pragma once

#include <vector>

namespace routedet {

// A probability vector over the vocabulary. Entries are non-negative and sum
// to 1 within 1e-9; validate() enforces both.
struct CategoricalDistribution {
    std::vector<double> probs;

    int size() const { return static_cast<int>(probs.size()); }
    void validate() const;

    double entropy() const;  // natural log
};

}  // namespace routedet
