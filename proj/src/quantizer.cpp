#include "unitlab/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "unitlab/error.hpp"
#include "unitlab/parallel.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {
namespace {

constexpr char kCodebookMagic[4] = {'G', 'S', 'L', 'K'};
constexpr std::uint16_t kCodebookVersion = 1;
constexpr std::size_t kAssignChunk = 2048;

std::size_t countDistinctRows(const Matrix& points) {
    std::vector<Eigen::Index> order(points.rows());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < points.cols(); ++j) {
            if (points(a, j) != points(b, j)) return points(a, j) < points(b, j);
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    std::size_t distinct = points.rows() > 0 ? 1 : 0;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (less(order[i - 1], order[i])) ++distinct;
    return distinct;
}

struct AssignResult {
    std::vector<int> labels;
    std::vector<double> point_dist;  // squared distance to the assigned centroid
    double inertia = 0.0;
};

// One assignment pass. Chunked so that parallel runs reduce per-chunk sums in
// a fixed order and match the serial result bit for bit.
AssignResult assignPoints(const Matrix& points, const Matrix& centroids, int threads,
                          Matrix* sums = nullptr, std::vector<std::int64_t>* counts = nullptr) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = centroids.rows();
    AssignResult res;
    res.labels.assign(static_cast<std::size_t>(n), 0);
    res.point_dist.assign(static_cast<std::size_t>(n), 0.0);

    Vector centroid_sq = centroids.rowwise().squaredNorm();
    std::size_t n_chunks = (static_cast<std::size_t>(n) + kAssignChunk - 1) / kAssignChunk;
    std::vector<double> chunk_inertia(n_chunks, 0.0);
    std::vector<Matrix> chunk_sums;
    std::vector<std::vector<std::int64_t>> chunk_counts;
    if (sums) {
        chunk_sums.assign(n_chunks, Matrix::Zero(k, points.cols()));
        chunk_counts.assign(n_chunks, std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
    }

    parallelChunks(static_cast<std::size_t>(n), kAssignChunk, threads,
                   [&](std::size_t c, std::size_t begin, std::size_t end) {
                       auto block = points.middleRows(static_cast<Eigen::Index>(begin),
                                                      static_cast<Eigen::Index>(end - begin));
                       // dist^2 = |x|^2 - 2 x.c + |c|^2; |x|^2 added only for inertia
                       Matrix cross = block * centroids.transpose();  // (end-begin) x k
                       for (Eigen::Index r = 0; r < cross.rows(); ++r) {
                           int best = 0;
                           double best_v = centroid_sq(0) - 2.0 * cross(r, 0);
                           for (Eigen::Index j = 1; j < k; ++j) {
                               double v = centroid_sq(j) - 2.0 * cross(r, j);
                               if (v < best_v) {
                                   best_v = v;
                                   best = static_cast<int>(j);
                               }
                           }
                           std::size_t idx = begin + static_cast<std::size_t>(r);
                           double d = block.row(r).squaredNorm() + best_v;
                           if (d < 0.0) d = 0.0;
                           res.labels[idx] = best;
                           res.point_dist[idx] = d;
                           chunk_inertia[c] += d;
                           if (sums) {
                               chunk_sums[c].row(best) += block.row(r);
                               ++chunk_counts[c][static_cast<std::size_t>(best)];
                           }
                       }
                   });

    for (std::size_t c = 0; c < n_chunks; ++c) res.inertia += chunk_inertia[c];
    if (sums) {
        sums->setZero(k, points.cols());
        counts->assign(static_cast<std::size_t>(k), 0);
        for (std::size_t c = 0; c < n_chunks; ++c) {
            *sums += chunk_sums[c];
            for (Eigen::Index j = 0; j < k; ++j) (*counts)[static_cast<std::size_t>(j)] += chunk_counts[c][static_cast<std::size_t>(j)];
        }
    }
    return res;
}

Matrix kmeansPlusPlusInit(const Matrix& points, int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    Matrix centroids(k, points.cols());
    Eigen::Index first = static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(n)));
    centroids.row(0) = points.row(first);
    Vector d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2(i);
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.integer(static_cast<std::uint64_t>(n)));
        }
        centroids.row(c) = points.row(pick);
        d2 = d2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }
    return centroids;
}

}  // namespace

Codebook trainKMeans(const Matrix& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
    require(k >= 2, ErrorKind::Domain, "trainKMeans: K must be >= 2");
    require(points.rows() >= 1 && points.cols() >= 1, ErrorKind::Domain, "trainKMeans: empty input");
    require(points.allFinite(), ErrorKind::NonFinite, "trainKMeans: non-finite input");
    require(points.rows() >= k, ErrorKind::Domain, "trainKMeans: fewer points than K");
    require(countDistinctRows(points) >= static_cast<std::size_t>(k), ErrorKind::Domain,
            "trainKMeans: fewer distinct points than K");

    Rng rng(seed);
    Matrix centroids = kmeansPlusPlusInit(points, k, rng);

    Codebook cb;
    cb.seed = seed;
    double prev_inertia = std::numeric_limits<double>::infinity();
    Matrix sums;
    std::vector<std::int64_t> counts;
    for (int iter = 0; iter < opts.max_iter; ++iter) {
        AssignResult ar = assignPoints(points, centroids, opts.threads, &sums, &counts);
        cb.iterations_run = iter + 1;
        cb.inertia = ar.inertia;
        cb.inertia_history.push_back(ar.inertia);
        require(ar.inertia <= prev_inertia * (1.0 + 1e-12) + 1e-12, ErrorKind::Domain,
                "trainKMeans: inertia increased; this is a bug");
        if (iter > 0 && prev_inertia - ar.inertia <= opts.rel_tol * prev_inertia) break;
        prev_inertia = ar.inertia;

        // M-step
        std::vector<int> empties;
        for (int j = 0; j < k; ++j) {
            if (counts[static_cast<std::size_t>(j)] > 0)
                centroids.row(j) = sums.row(j) / static_cast<double>(counts[static_cast<std::size_t>(j)]);
            else
                empties.push_back(j);
        }
        if (!empties.empty()) {
            // Re-seed each empty cluster to the point currently farthest from
            // its assigned centroid, never reusing a point.
            std::vector<Eigen::Index> used;
            for (int j : empties) {
                Eigen::Index far_idx = -1;
                double far_d = -1.0;
                for (Eigen::Index i = 0; i < points.rows(); ++i) {
                    if (std::find(used.begin(), used.end(), i) != used.end()) continue;
                    if (ar.point_dist[static_cast<std::size_t>(i)] > far_d) {
                        far_d = ar.point_dist[static_cast<std::size_t>(i)];
                        far_idx = i;
                    }
                }
                centroids.row(j) = points.row(far_idx);
                used.push_back(far_idx);
            }
        }
    }
    cb.centroids = centroids;
    return cb;
}

Codebook trainCodebook(const std::vector<FrameMatrix>& frames, int k, std::uint64_t seed,
                       const KMeansOptions& opts) {
    require(!frames.empty(), ErrorKind::Domain, "trainCodebook: empty frame collection");
    Eigen::Index total = 0;
    Eigen::Index dim = frames.front().dim();
    for (const FrameMatrix& fm : frames) {
        require(fm.dim() == dim, ErrorKind::Domain,
                "trainCodebook: dimension mismatch in " + fm.utt_id);
        total += fm.frames();
    }
    Matrix points(total, dim);
    Eigen::Index row = 0;
    for (const FrameMatrix& fm : frames) {
        points.middleRows(row, fm.frames()) = fm.data;
        row += fm.frames();
    }
    return trainKMeans(points, k, seed, opts);
}

UnitSequence encode(const FrameMatrix& fm, const Codebook& cb, int threads) {
    require(fm.dim() == cb.dim(), ErrorKind::Domain,
            "encode: frame dim " + std::to_string(fm.dim()) + " != codebook dim " +
                std::to_string(cb.dim()));
    AssignResult ar = assignPoints(fm.data, cb.centroids, threads);
    UnitSequence us;
    us.utt_id = fm.utt_id;
    us.duration_s = fm.durationS();
    us.units.reserve(ar.labels.size());
    for (int label : ar.labels) us.units.push_back(static_cast<std::int32_t>(label));
    return us;
}

std::vector<std::int32_t> dedup(std::span<const std::int32_t> units) {
    std::vector<std::int32_t> out;
    out.reserve(units.size());
    for (std::int32_t u : units)
        if (out.empty() || out.back() != u) out.push_back(u);
    return out;
}

UnitSequence dedup(const UnitSequence& us) {
    UnitSequence out;
    out.utt_id = us.utt_id;
    out.duration_s = us.duration_s;
    out.units = dedup(std::span<const std::int32_t>(us.units));
    return out;
}

double bitrate(std::span<const UnitSequence> corpus, bool post_dedup) {
    require(!corpus.empty(), ErrorKind::Domain, "bitrate: empty corpus");
    std::unordered_map<std::int32_t, std::uint64_t> counts;
    std::uint64_t n_total = 0;
    double d_total = 0.0;
    for (const UnitSequence& us : corpus) {
        require(us.duration_s.has_value() && *us.duration_s > 0.0, ErrorKind::Domain,
                "bitrate: missing or non-positive duration for " + us.utt_id);
        d_total += *us.duration_s;
        if (post_dedup) {
            auto d = dedup(std::span<const std::int32_t>(us.units));
            for (std::int32_t u : d) ++counts[u];
            n_total += d.size();
        } else {
            for (std::int32_t u : us.units) ++counts[u];
            n_total += us.units.size();
        }
    }
    if (n_total == 0) return 0.0;
    double entropy_bits = 0.0;
    for (const auto& [unit, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(n_total);
        entropy_bits -= p * std::log2(p);
    }
    return static_cast<double>(n_total) / d_total * entropy_bits;
}

void writeCodebook(const std::filesystem::path& path, const Codebook& cb) {
    require(cb.centroids.rows() >= 2 && cb.centroids.cols() >= 1, ErrorKind::Domain,
            "writeCodebook: empty codebook");
    require(cb.centroids.allFinite(), ErrorKind::NonFinite, "writeCodebook: non-finite centroids");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    std::string buf;
    buf.append(kCodebookMagic, 4);
    auto put16 = [&](std::uint16_t v) {
        buf.push_back(static_cast<char>(v & 0xff));
        buf.push_back(static_cast<char>((v >> 8) & 0xff));
    };
    auto put32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    auto put64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put16(kCodebookVersion);
    put32(static_cast<std::uint32_t>(cb.centroids.rows()));
    put32(static_cast<std::uint32_t>(cb.centroids.cols()));
    for (Eigen::Index i = 0; i < cb.centroids.rows(); ++i) {
        for (Eigen::Index j = 0; j < cb.centroids.cols(); ++j) {
            float v = static_cast<float>(cb.centroids(i, j));
            std::uint32_t bits;
            std::memcpy(&bits, &v, 4);
            put32(bits);
        }
    }
    put64(cb.seed);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

Codebook readCodebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string data = std::move(ss).str();
    std::size_t pos = 0;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size())
            fail(ErrorKind::Truncated, path.string() + ": truncated codebook");
    };
    need(4);
    if (std::memcmp(data.data(), kCodebookMagic, 4) != 0)
        fail(ErrorKind::BadMagic, path.string() + ": bad magic (expected GSLK)");
    pos = 4;
    auto get16 = [&]() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(static_cast<unsigned char>(data[pos]) |
                                                     (static_cast<unsigned char>(data[pos + 1]) << 8));
        pos += 2;
        return v;
    };
    auto get32 = [&]() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 4;
        return v;
    };
    auto get64 = [&]() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
        pos += 8;
        return v;
    };
    std::uint16_t version = get16();
    if (version != kCodebookVersion)
        fail(ErrorKind::BadVersion, path.string() + ": unsupported codebook version");
    std::uint32_t k = get32();
    std::uint32_t d = get32();
    if (k < 2 || d == 0) fail(ErrorKind::ZeroDims, path.string() + ": bad codebook dims");
    Codebook cb;
    cb.centroids.resize(k, d);
    for (std::uint32_t i = 0; i < k; ++i) {
        for (std::uint32_t j = 0; j < d; ++j) {
            std::uint32_t bits = get32();
            float v;
            std::memcpy(&v, &bits, 4);
            if (!std::isfinite(v))
                fail(ErrorKind::NonFinite, path.string() + ": non-finite centroid value");
            cb.centroids(i, j) = static_cast<double>(v);
        }
    }
    cb.seed = get64();
    if (pos != data.size()) fail(ErrorKind::Format, path.string() + ": trailing bytes");
    return cb;
}

}  // namespace unitlab
