#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "newtonflow/linalg.hpp"

namespace newtonflow {

/// Graded outcome of a sampled criterion check.
///
/// Satisfied: no violation on the samples and the growth statistic is stable.
/// Violated: a concrete witness fails the inequality beyond numeric slack.
/// Inconclusive: anything else, including vacuous sample sets.
enum class Verdict { Satisfied, Violated, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Satisfied: return "Satisfied";
        case Verdict::Violated: return "Violated";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

/// Slack by which an inequality must fail before a point counts as a violation.
inline constexpr double kViolationSlack = 1e-9;

struct Certificate {
    std::string criterion;
    Verdict verdict = Verdict::Inconclusive;
    double extremal_value = std::numeric_limits<double>::quiet_NaN();
    Vector witness;
    double threshold = 0.0;
    std::size_t samples_used = 0;
    std::size_t samples_skipped_singular = 0;
    std::uint64_t seed = 0;
    std::string note;
    /// Criterion-specific scalars, in insertion order.
    std::vector<std::pair<std::string, double>> stats;
    /// Criterion-specific points, in insertion order.
    std::vector<std::pair<std::string, Vector>> points;

    double stat(const std::string& key) const {
        for (const auto& [k, v] : stats)
            if (k == key) return v;
        return std::numeric_limits<double>::quiet_NaN();
    }
    const Vector* point(const std::string& key) const {
        for (const auto& [k, v] : points)
            if (k == key) return &v;
        return nullptr;
    }
};

}  // namespace newtonflow
