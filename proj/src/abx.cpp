#include "unitlab/abx.hpp"

#include <algorithm>
#include <map>
#include <tuple>
#include <unordered_map>

#include "unitlab/error.hpp"
#include "unitlab/io.hpp"
#include "unitlab/parallel.hpp"
#include "unitlab/rng.hpp"

namespace unitlab {
namespace {

struct Cell {
    std::string speaker_config;
    std::string context;
    std::string phone_a;
    std::string phone_b;
    // Item indices; within mode has a_tokens == x_tokens and requires a != x.
    std::vector<int> a_tokens;
    std::vector<int> b_tokens;
    std::vector<int> x_tokens;
    bool same_pool = false;  // a and x drawn from the same token list
};

struct Triple {
    int a, b, x;
};

Triple decodeTriple(const Cell& cell, std::int64_t t) {
    const std::int64_t nb = static_cast<std::int64_t>(cell.b_tokens.size());
    if (cell.same_pool) {
        const std::int64_t na1 = static_cast<std::int64_t>(cell.a_tokens.size()) - 1;
        std::int64_t xi = t / (na1 * nb);
        std::int64_t rem = t % (na1 * nb);
        std::int64_t aj = rem / nb;
        std::int64_t bk = rem % nb;
        if (aj >= xi) ++aj;  // skip x itself
        return {cell.a_tokens[static_cast<std::size_t>(aj)],
                cell.b_tokens[static_cast<std::size_t>(bk)],
                cell.x_tokens[static_cast<std::size_t>(xi)]};
    }
    const std::int64_t na = static_cast<std::int64_t>(cell.a_tokens.size());
    std::int64_t xi = t / (na * nb);
    std::int64_t rem = t % (na * nb);
    std::int64_t aj = rem / nb;
    std::int64_t bk = rem % nb;
    return {cell.a_tokens[static_cast<std::size_t>(aj)],
            cell.b_tokens[static_cast<std::size_t>(bk)],
            cell.x_tokens[static_cast<std::size_t>(xi)]};
}

std::int64_t cellTripleCount(const Cell& cell) {
    if (cell.same_pool)
        return static_cast<std::int64_t>(cell.a_tokens.size()) *
               (static_cast<std::int64_t>(cell.a_tokens.size()) - 1) *
               static_cast<std::int64_t>(cell.b_tokens.size());
    return static_cast<std::int64_t>(cell.a_tokens.size()) *
           static_cast<std::int64_t>(cell.b_tokens.size()) *
           static_cast<std::int64_t>(cell.x_tokens.size());
}

std::string cellKey(const Cell& c) {
    return c.speaker_config + "|" + c.context + "|" + c.phone_a + "|" + c.phone_b;
}

}  // namespace

AbxMode abxModeFromString(const std::string& name) {
    if (name == "within") return AbxMode::Within;
    if (name == "across") return AbxMode::Across;
    fail(ErrorKind::Domain, "unknown ABX mode '" + name + "' (within|across)");
}

std::string toString(AbxMode mode) { return mode == AbxMode::Within ? "within" : "across"; }

AbxResult abxScore(const AbxItemSet& items, const std::vector<FrameMatrix>& frames, AbxMode mode,
                   const AbxOptions& opts) {
    require(!items.items.empty(), ErrorKind::Domain, "abxScore: empty item set");

    std::unordered_map<std::string, const FrameMatrix*> by_id;
    for (const FrameMatrix& fm : frames) by_id[fm.utt_id] = &fm;

    // Slice every item once.
    std::vector<Matrix> slices(items.items.size());
    for (std::size_t i = 0; i < items.items.size(); ++i) {
        const AbxItem& it = items.items[i];
        auto found = by_id.find(it.utt_id);
        if (found == by_id.end())
            fail(ErrorKind::Domain, "abxScore: item references missing utterance '" + it.utt_id + "'");
        slices[i] = sliceFrames(*found->second, it.onset_s, it.offset_s).data;
    }

    // Token lists keyed by (speaker, context, center phone); std::map keeps
    // cell construction deterministic under item permutation.
    using GroupKey = std::tuple<std::string, std::string, std::string>;
    std::map<GroupKey, std::vector<int>> groups;
    for (std::size_t i = 0; i < items.items.size(); ++i) {
        const AbxItem& it = items.items[i];
        groups[{it.speaker, it.prev_phone + "_" + it.next_phone, it.center_phone}].push_back(
            static_cast<int>(i));
    }
    for (auto& [key, tokens] : groups) std::sort(tokens.begin(), tokens.end());

    std::vector<Cell> cells;
    if (mode == AbxMode::Within) {
        // (speaker, context) -> center -> tokens
        std::map<std::pair<std::string, std::string>, std::map<std::string, const std::vector<int>*>> sc;
        for (const auto& [key, tokens] : groups)
            sc[{std::get<0>(key), std::get<1>(key)}][std::get<2>(key)] = &tokens;
        for (const auto& [skey, centers] : sc) {
            for (const auto& [pa, a_tokens] : centers) {
                if (a_tokens->size() < 2) continue;
                for (const auto& [pb, b_tokens] : centers) {
                    if (pa == pb) continue;
                    Cell cell;
                    cell.speaker_config = skey.first;
                    cell.context = skey.second;
                    cell.phone_a = pa;
                    cell.phone_b = pb;
                    cell.a_tokens = *a_tokens;
                    cell.b_tokens = *b_tokens;
                    cell.x_tokens = *a_tokens;
                    cell.same_pool = true;
                    cells.push_back(std::move(cell));
                }
            }
        }
    } else {
        // context -> speaker -> center -> tokens
        std::map<std::string, std::map<std::string, std::map<std::string, const std::vector<int>*>>> cx;
        for (const auto& [key, tokens] : groups)
            cx[std::get<1>(key)][std::get<0>(key)][std::get<2>(key)] = &tokens;
        for (const auto& [ctx, speakers] : cx) {
            for (const auto& [s_ab, centers_ab] : speakers) {
                for (const auto& [s_x, centers_x] : speakers) {
                    if (s_ab == s_x) continue;
                    for (const auto& [pa, a_tokens] : centers_ab) {
                        auto x_found = centers_x.find(pa);
                        if (x_found == centers_x.end()) continue;
                        for (const auto& [pb, b_tokens] : centers_ab) {
                            if (pa == pb) continue;
                            Cell cell;
                            cell.speaker_config = s_ab + "->" + s_x;
                            cell.context = ctx;
                            cell.phone_a = pa;
                            cell.phone_b = pb;
                            cell.a_tokens = *a_tokens;
                            cell.b_tokens = *b_tokens;
                            cell.x_tokens = *x_found->second;
                            cells.push_back(std::move(cell));
                        }
                    }
                }
            }
        }
    }
    require(!cells.empty(), ErrorKind::Domain, "abxScore: no valid (A,B) cells in item set");

    // Score cells independently; per-cell RNG is derived from (seed, cell
    // key) so the parallel schedule cannot change results.
    std::vector<AbxCellScore> scores(cells.size());
    parallelChunks(cells.size(), 1, opts.threads, [&](std::size_t c, std::size_t, std::size_t) {
        const Cell& cell = cells[c];
        std::int64_t total = cellTripleCount(cell);
        std::vector<std::uint64_t> picks;
        std::int64_t n = total;
        if (opts.max_triples_per_cell > 0 && total > opts.max_triples_per_cell) {
            Rng rng(deriveSeed(opts.seed, {fnv1a64(cellKey(cell))}));
            picks = rng.sampleWithoutReplacement(static_cast<std::uint64_t>(total),
                                                 static_cast<std::uint64_t>(opts.max_triples_per_cell));
            n = opts.max_triples_per_cell;
        }
        std::unordered_map<std::uint64_t, double> dtw_cache;
        auto dist = [&](int i, int j) {
            std::uint64_t key = (static_cast<std::uint64_t>(std::min(i, j)) << 32) |
                                static_cast<std::uint64_t>(std::max(i, j));
            auto found = dtw_cache.find(key);
            if (found != dtw_cache.end()) return found->second;
            double d = dtwDistance(slices[static_cast<std::size_t>(i)],
                                   slices[static_cast<std::size_t>(j)], opts.metric);
            dtw_cache.emplace(key, d);
            return d;
        };
        double sum = 0.0;
        for (std::int64_t t = 0; t < n; ++t) {
            Triple tr = decodeTriple(cell, picks.empty() ? t : static_cast<std::int64_t>(picks[static_cast<std::size_t>(t)]));
            sum += abxTripleScore(dist(tr.a, tr.x), dist(tr.b, tr.x));
        }
        AbxCellScore& out = scores[c];
        out.speaker_config = cell.speaker_config;
        out.context = cell.context;
        out.phone_a = cell.phone_a;
        out.phone_b = cell.phone_b;
        out.n_triples = n;
        out.score = sum / static_cast<double>(n);
    });

    // contexts -> phone pairs -> speaker configurations
    std::map<std::string, std::map<std::pair<std::string, std::string>, std::pair<double, int>>> agg;
    std::int64_t n_triples = 0;
    for (const AbxCellScore& s : scores) {
        auto& slot = agg[s.speaker_config][{s.phone_a, s.phone_b}];
        slot.first += s.score;
        slot.second += 1;
        n_triples += s.n_triples;
    }
    double cfg_sum = 0.0;
    int cfg_n = 0;
    for (const auto& [cfg, pairs] : agg) {
        double pair_sum = 0.0;
        int pair_n = 0;
        for (const auto& [pair, slot] : pairs) {
            pair_sum += slot.first / static_cast<double>(slot.second);
            pair_n += 1;
        }
        cfg_sum += pair_sum / static_cast<double>(pair_n);
        cfg_n += 1;
    }

    AbxResult result;
    result.mode = mode;
    result.cells = std::move(scores);
    result.n_triples = n_triples;
    result.error_rate = 1.0 - cfg_sum / static_cast<double>(cfg_n);
    return result;
}

}  // namespace unitlab
