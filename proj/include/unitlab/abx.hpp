#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unitlab/distance.hpp"
#include "unitlab/types.hpp"

namespace unitlab {

enum class AbxMode { Within, Across };

AbxMode abxModeFromString(const std::string& name);
std::string toString(AbxMode mode);

// 1 if x is closer to a than to b, 0.5 on a tie. Scores stay dyadic so sums
// and means are exact and order-independent.
inline double abxTripleScore(double d_ax, double d_bx) {
    if (d_ax < d_bx) return 1.0;
    if (d_ax > d_bx) return 0.0;
    return 0.5;
}

struct AbxCellScore {
    std::string speaker_config;  // within: speaker; across: "<spk_ab>-><spk_x>"
    std::string context;         // "<prev>_<next>"
    std::string phone_a;
    std::string phone_b;
    double score = 0.0;  // mean triple score; 1 = perfect discrimination
    std::int64_t n_triples = 0;
};

struct AbxResult {
    AbxMode mode = AbxMode::Within;
    double error_rate = 0.0;
    std::int64_t n_triples = 0;
    std::vector<AbxCellScore> cells;
};

struct AbxOptions {
    FrameMetric metric = FrameMetric::Angular;
    std::int64_t max_triples_per_cell = 5000;  // exact enumeration under the cap
    std::uint64_t seed = 0;
    int threads = 0;
};

// DTW-based ABX over triphone items. Cells are (speaker config, context,
// ordered phone pair); cell scores average sampled triples, then cells are
// averaged over contexts, phone pairs, and speaker configurations, in that
// order. error_rate = 1 - aggregate score.
AbxResult abxScore(const AbxItemSet& items, const std::vector<FrameMatrix>& frames, AbxMode mode,
                   const AbxOptions& opts = {});

}  // namespace unitlab
