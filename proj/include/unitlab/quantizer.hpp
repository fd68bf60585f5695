#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "unitlab/types.hpp"

namespace unitlab {

struct Codebook {
    Matrix centroids;  // K x D
    double inertia = 0.0;
    std::uint64_t seed = 0;
    int iterations_run = 0;
    std::vector<double> inertia_history;  // one entry per assignment pass

    int k() const { return static_cast<int>(centroids.rows()); }
    int dim() const { return static_cast<int>(centroids.cols()); }
};

struct KMeansOptions {
    int max_iter = 300;
    double rel_tol = 1e-6;
    int threads = 0;  // 0 = all cores; the result does not depend on this
};

// Lloyd's algorithm with k-means++ initialization. Points are rows. Stops
// when the relative inertia improvement drops to rel_tol or at max_iter;
// empty clusters are re-seeded to the point farthest from its centroid.
Codebook trainKMeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts = {});

// Same, with per-utterance frame matrices stacked in order.
Codebook trainCodebook(const std::vector<FrameMatrix>& frames, int k, std::uint64_t seed,
                       const KMeansOptions& opts = {});

// Nearest-centroid assignment per frame (squared Euclidean, ties to the
// lowest centroid index).
UnitSequence encode(const FrameMatrix& fm, const Codebook& cb, int threads = 0);

// Collapses runs of equal adjacent units to a single occurrence.
UnitSequence dedup(const UnitSequence& us);
std::vector<std::int32_t> dedup(std::span<const std::int32_t> units);

// Empirical unigram entropy of the corpus (bits) times symbols per second:
// B = (N_total / D_total) * H. Every sequence must carry a duration.
double bitrate(std::span<const UnitSequence> corpus, bool post_dedup = true);

// Codebook file: magic "GSLK", version u16, K u32, D u32, centroids f32
// row-major, seed u64. Inertia and iteration count are training-only fields.
void writeCodebook(const std::filesystem::path& path, const Codebook& cb);
Codebook readCodebook(const std::filesystem::path& path);

}  // namespace unitlab
