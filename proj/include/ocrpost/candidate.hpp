#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ocrpost {

// Ordered feature scores; the parallel names are fixed per configuration and
// travel with the ranking model to prevent train/inference skew.
struct FeatureVector {
    std::vector<double> values;
};

struct Candidate {
    std::string surface;
    FeatureVector features;
    std::optional<int> label;         // 1 = intended correction, 0 otherwise
    std::optional<double> confidence; // present once scored by a model
};

} // namespace ocrpost
