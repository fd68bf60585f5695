// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "unitlab/abx.hpp"
#include "unitlab/distance.hpp"
#include "unitlab/editdist.hpp"
#include "unitlab/error.hpp"
#include "unitlab/genmetrics.hpp"
#include "unitlab/io.hpp"
#include "unitlab/ngram.hpp"
#include "unitlab/quantizer.hpp"
#include "unitlab/rng.hpp"
#include "unitlab/synth.hpp"

using namespace unitlab;

namespace {

struct Check {
    bool ok = true;
    std::string detail;
    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

// ---------- shared helpers ----------

std::vector<UnitSequence> markovCorpus(int n_utts, int len_lo, int len_hi, int vocab, int block,
                                       double p_dom, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<UnitSequence> corpus;
    for (int u = 0; u < n_utts; ++u) {
        UnitSequence us;
        us.utt_id = "m" + std::to_string(u);
        int len = len_lo + static_cast<int>(rng.integer(static_cast<std::uint64_t>(len_hi - len_lo + 1)));
        std::int32_t state = static_cast<std::int32_t>(rng.integer(static_cast<std::uint64_t>(vocab)));
        us.units.push_back(state);
        for (int t = 1; t < len; ++t) {
            std::int32_t next;
            if (rng.uniform() < p_dom) {
                // dominant successor cycles inside a small block, so greedy
                // decoding stutters through a short loop
                next = (state / block) * block + (state % block + 1) % block;
            } else {
                next = static_cast<std::int32_t>(rng.integer(static_cast<std::uint64_t>(vocab)));
            }
            if (next == state) next = (next + 1) % vocab;
            us.units.push_back(next);
            state = next;
        }
        corpus.push_back(std::move(us));
    }
    return corpus;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(rx.size());
    my /= static_cast<double>(ry.size());
    double num = 0, dx = 0, dy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    return num / std::sqrt(dx * dy);
}

double adjustedRand(const std::vector<int>& a, const std::vector<int>& b) {
    std::map<std::pair<int, int>, std::int64_t> cont;
    std::map<int, std::int64_t> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cont[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    auto c2 = [](std::int64_t n) { return static_cast<double>(n) * (n - 1) / 2.0; };
    double sum_c = 0, sum_a = 0, sum_b = 0;
    for (const auto& [key, n] : cont) sum_c += c2(n);
    for (const auto& [key, n] : ra) sum_a += c2(n);
    for (const auto& [key, n] : rb) sum_b += c2(n);
    double total = c2(static_cast<std::int64_t>(a.size()));
    double expected = sum_a * sum_b / total;
    double max_index = 0.5 * (sum_a + sum_b);
    return (sum_c - expected) / (max_index - expected);
}

// ---------- criteria ----------

// 1. dedup reproduces the footnote example
Check criterion1() {
    Check c;
    UnitSequence us;
    us.utt_id = "u1";
    us.units = {10, 11, 11, 11, 21, 32, 32, 32, 21};
    c.expect(dedup(us).units == std::vector<std::int32_t>{10, 11, 21, 32, 21},
             "dedup([10,11,11,11,21,32,32,32,21]) != [10,11,21,32,21]");
    return c;
}

// 2. autoBleu equals a brute-force oracle; stutter phrase scores 1.0
double bruteAutoBleu(const TokenSeq& u, int n) {
    double log_sum = 0.0;
    for (int k = 1; k <= n; ++k) {
        std::int64_t total = static_cast<std::int64_t>(u.size()) - k + 1;
        if (total <= 0) return 0.0;
        std::int64_t repeated = 0;
        for (std::int64_t i = 0; i < total; ++i) {
            bool found = false;
            for (std::int64_t j = 0; j < total && !found; ++j)
                if (j != i) found = std::equal(u.begin() + i, u.begin() + i + k, u.begin() + j);
            if (found) ++repeated;
        }
        if (repeated == 0) return 0.0;
        log_sum += std::log(static_cast<double>(repeated) / static_cast<double>(total));
    }
    return std::exp(log_sum / n);
}

Check criterion2() {
    Check c;
    Rng rng(2026);
    for (int trial = 0; trial < 1000 && c.ok; ++trial) {
        TokenSeq u;
        int len = 1 + static_cast<int>(rng.integer(12));
        for (int i = 0; i < len; ++i) u.push_back(static_cast<std::int32_t>(rng.integer(5)));
        for (int n : {1, 2, 3}) {
            if (autoBleu(u, n) != bruteAutoBleu(u, n)) {
                c.expect(false, "autoBleu mismatch vs brute-force oracle at trial " +
                                    std::to_string(trial) + ", n=" + std::to_string(n));
                break;
            }
        }
    }
    auto stutter = internTokens({{"the", "property", "the", "property", "the", "property"}});
    c.expect(autoBleu(stutter[0], 1) == 1.0, "stutter phrase autoBleu(.,1) != 1.0");
    return c;
}

// 3. selfBleu limits and handcrafted oracle case
double bruteBleu2(const TokenSeq& hyp, const std::vector<TokenSeq>& refs) {
    if (hyp.empty()) return 0.0;
    auto count = [](const TokenSeq& s, int k) {
        std::map<std::vector<std::int32_t>, std::int64_t> m;
        for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= s.size(); ++i)
            ++m[std::vector<std::int32_t>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                          s.begin() + static_cast<std::ptrdiff_t>(i) + k)];
        return m;
    };
    double p1 = 0, p2 = 0;
    for (int k = 1; k <= 2; ++k) {
        std::int64_t den = static_cast<std::int64_t>(hyp.size()) - k + 1;
        if (den <= 0) return 0.0;
        auto hc = count(hyp, k);
        std::int64_t num = 0;
        for (const auto& [gram, cnt] : hc) {
            std::int64_t best = 0;
            for (const TokenSeq& r : refs) {
                auto rc = count(r, k);
                auto it = rc.find(gram);
                if (it != rc.end()) best = std::max(best, it->second);
            }
            num += std::min(cnt, best);
        }
        if (k == 1) {
            if (num == 0) return 0.0;
            p1 = static_cast<double>(num) / static_cast<double>(den);
        } else {
            p2 = static_cast<double>(num + 1) / static_cast<double>(den + 1);
        }
    }
    std::int64_t hl = static_cast<std::int64_t>(hyp.size());
    std::int64_t rb = static_cast<std::int64_t>(refs[0].size());
    for (const TokenSeq& r : refs) {
        std::int64_t rl = static_cast<std::int64_t>(r.size());
        if (std::llabs(rl - hl) < std::llabs(rb - hl) ||
            (std::llabs(rl - hl) == std::llabs(rb - hl) && rl < rb))
            rb = rl;
    }
    double bp = hl >= rb ? 1.0 : std::exp(1.0 - static_cast<double>(rb) / static_cast<double>(hl));
    return bp * std::sqrt(p1 * p2);
}

Check criterion3() {
    Check c;
    std::vector<TokenSeq> identical(5, TokenSeq{3, 1, 4, 1, 5, 9, 2, 6});
    c.expect(std::abs(selfBleu(identical, 2) - 1.0) <= 1e-9, "identical corpus selfBleu != 1");
    std::vector<TokenSeq> disjoint{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    c.expect(selfBleu(disjoint, 2) == 0.0, "disjoint corpus selfBleu != 0");
    auto corpus = internTokens({{"the", "cat", "sat", "on", "the", "mat"},
                                {"the", "cat", "ran", "away"},
                                {"a", "dog", "sat", "on", "the", "mat", "today"}});
    double oracle = (bruteBleu2(corpus[0], {corpus[1], corpus[2]}) +
                     bruteBleu2(corpus[1], {corpus[0], corpus[2]}) +
                     bruteBleu2(corpus[2], {corpus[0], corpus[1]})) /
                    3.0;
    c.expect(std::abs(selfBleu(corpus, 2) - oracle) <= 1e-9,
             "handcrafted selfBleu differs from brute-force oracle");
    return c;
}

// 4. k-means on 3 Gaussians over 10 seeds
Check criterion4() {
    Check c;
    for (std::uint64_t s = 0; s < 10 && c.ok; ++s) {
        Rng rng(1000 + s);
        Matrix points(300, 2);
        std::vector<int> gold(300);
        double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
        for (int i = 0; i < 300; ++i) {
            int k = i % 3;
            gold[static_cast<std::size_t>(i)] = k;
            points(i, 0) = centers[k][0] + 0.1 * rng.gaussian();
            points(i, 1) = centers[k][1] + 0.1 * rng.gaussian();
        }
        Codebook cb = trainKMeans(points, 3, s);
        for (std::size_t i = 1; i < cb.inertia_history.size(); ++i)
            c.expect(cb.inertia_history[i] <= cb.inertia_history[i - 1] * (1 + 1e-12) + 1e-12,
                     "inertia increased during Lloyd iteration (seed " + std::to_string(s) + ")");
        FrameMatrix fm;
        fm.utt_id = "pts";
        fm.frame_period_ms = 10;
        fm.data = points;
        UnitSequence enc = encode(fm, cb);
        std::vector<int> labels(enc.units.begin(), enc.units.end());
        double ari = adjustedRand(gold, labels);
        c.expect(ari >= 0.99, "adjusted Rand " + std::to_string(ari) + " < 0.99 at seed " +
                                  std::to_string(s));
    }
    return c;
}

// 5. ABX on separable and random corpora; role-swap identity
Check criterion5() {
    Check c;
    SynthConfig cfg;
    cfg.n_phones = 6;
    cfg.embed_dim = 8;
    cfg.n_speakers = 2;
    cfg.speaker_offset_scale = 0.0;
    cfg.within_class_noise = 0.05;
    cfg.phone_mean_scale = 5.0;
    cfg.n_utterances = 60;
    cfg.seed = 20260811;
    SynthCorpus corpus = makeSyntheticCorpus(cfg);
    AbxOptions opts;
    opts.max_triples_per_cell = 200;
    opts.seed = 1;
    AbxResult within = abxScore(corpus.items, corpus.frames, AbxMode::Within, opts);
    AbxResult across = abxScore(corpus.items, corpus.frames, AbxMode::Across, opts);
    c.expect(within.error_rate <= 0.01, "separable within-speaker error " +
                                            std::to_string(within.error_rate) + " > 1%");
    c.expect(across.error_rate <= 0.01, "separable across-speaker error " +
                                            std::to_string(across.error_rate) + " > 1%");

    // i.i.d. random frames: error 0.50 +- 0.02 over >= 10,000 triples.
    // 6 phone classes x 40 tokens: triples sharing tokens are correlated, so
    // the variance budget comes from token count and cell count, not from the
    // number of sampled triples.
    Rng rng(99);
    std::vector<FrameMatrix> frames;
    AbxItemSet items;
    int id = 0;
    for (int p = 0; p < 6; ++p) {
        for (int t = 0; t < 40; ++t) {
            FrameMatrix fm;
            fm.utt_id = "r" + std::to_string(id++);
            fm.frame_period_ms = 10;
            fm.data.resize(5, 8);
            for (int r = 0; r < 5; ++r)
                for (int d = 0; d < 8; ++d) fm.data(r, d) = rng.gaussian();
            AbxItem item{fm.utt_id, 0.0, fm.durationS(), "P" + std::to_string(p), "b", "t", "spk0"};
            frames.push_back(std::move(fm));
            items.items.push_back(std::move(item));
        }
    }
    AbxOptions ropts;
    ropts.max_triples_per_cell = 10000 / 30 + 1;  // 30 ordered phone pairs
    ropts.seed = 99 * 31 + 7;
    AbxResult random_res = abxScore(items, frames, AbxMode::Within, ropts);
    c.expect(random_res.n_triples >= 10000,
             "only " + std::to_string(random_res.n_triples) + " triples scored");
    c.expect(std::abs(random_res.error_rate - 0.5) <= 0.02,
             "random-frame error " + std::to_string(random_res.error_rate) + " not in 0.50 +- 0.02");

    // role-swap symmetrization on real DTW distances, exact
    double sum_fwd = 0, sum_swp = 0;
    int n_triples = 0;
    for (int a = 0; a < 8; ++a) {
        for (int b = 8; b < 16; ++b) {
            for (int x = 16; x < 24; ++x) {
                double dax = dtwDistance(frames[static_cast<std::size_t>(a)].data,
                                         frames[static_cast<std::size_t>(x)].data,
                                         FrameMetric::Angular);
                double dbx = dtwDistance(frames[static_cast<std::size_t>(b)].data,
                                         frames[static_cast<std::size_t>(x)].data,
                                         FrameMetric::Angular);
                sum_fwd += abxTripleScore(dax, dbx);
                sum_swp += abxTripleScore(dbx, dax);
                ++n_triples;
            }
        }
    }
    c.expect(sum_fwd + sum_swp == static_cast<double>(n_triples),
             "role-swap symmetrization identity violated");
    return c;
}

// 6. bitrate on an i.i.d. uniform corpus and a constant corpus
Check criterion6() {
    Check c;
    Rng rng(6);
    UnitSequence us;
    us.utt_id = "u";
    for (int i = 0; i < 100000; ++i)
        us.units.push_back(static_cast<std::int32_t>(rng.integer(4)));
    us.duration_s = 10000.0;  // 10 symbols/s
    std::vector<UnitSequence> corpus{us};
    double b = bitrate(corpus, false);
    c.expect(std::abs(b - 20.0) <= 0.2, "uniform 4-symbol bitrate " + std::to_string(b));

    UnitSequence konst;
    konst.utt_id = "k";
    konst.units.assign(5000, 7);
    konst.duration_s = 500.0;
    std::vector<UnitSequence> corpus2{konst};
    c.expect(bitrate(corpus2, false) == 0.0, "constant corpus bitrate != 0");
    c.expect(bitrate(corpus2, true) == 0.0, "constant corpus post-dedup bitrate != 0");
    return c;
}

// 7. n-gram normalization, chi-square sampling fit, greedy limit
Check criterion7() {
    Check c;
    auto corpus = markovCorpus(60, 25, 35, 12, 4, 0.6, 7);
    NGramModel model = trainNGram(corpus, {});
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::int32_t> ctx;
        int len = static_cast<int>(rng.integer(5));
        for (int i = 0; i < len; ++i)
            ctx.push_back(static_cast<std::int32_t>(rng.integer(16)));
        auto dist = model.nextTokenDistribution(ctx);
        double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
        c.expect(std::abs(sum - 1.0) <= 1e-9,
                 "context distribution sums to " + std::to_string(sum));
    }

    // chi-square at tau=1 on a 2-symbol unigram model, 1e5 draws, dof 2
    std::vector<UnitSequence> uni_corpus;
    for (int i = 0; i < 65; ++i) {
        UnitSequence u;
        u.utt_id = "a" + std::to_string(i);
        u.units = {0};
        uni_corpus.push_back(u);
    }
    for (int i = 0; i < 35; ++i) {
        UnitSequence u;
        u.utt_id = "b" + std::to_string(i);
        u.units = {1};
        uni_corpus.push_back(u);
    }
    NGramOptions uopts;
    uopts.order = 1;
    NGramModel uni = trainNGram(uni_corpus, uopts);
    auto probs = uni.nextTokenDistribution({});
    const int n = 100000;
    std::vector<std::int64_t> observed(3, 0);
    for (int i = 0; i < n; ++i) {
        UnitSequence s = sample(uni, 1.0, 1, deriveSeed(4242, {static_cast<std::uint64_t>(i)}));
        if (s.units.empty()) ++observed[2];
        else ++observed[s.units[0] == 0 ? 0 : 1];
    }
    double chi2 = 0;
    for (int k = 0; k < 3; ++k) {
        double expected = probs[static_cast<std::size_t>(k)] * n;
        double d = static_cast<double>(observed[static_cast<std::size_t>(k)]) - expected;
        chi2 += d * d / expected;
    }
    c.expect(chi2 < 13.8155, "chi-square statistic " + std::to_string(chi2) +
                                 " >= 13.8155 (p <= 0.001, dof 2)");

    // tau -> 0 equals greedy
    for (std::uint64_t s : {1ULL, 2ULL, 3ULL, 4ULL}) {
        UnitSequence cold = sample(model, 1e-6, 25, s);
        std::vector<std::int32_t> window(static_cast<std::size_t>(model.order() - 1), kBos);
        std::vector<std::int32_t> greedy;
        const auto& pred = model.predTokens();
        for (int t = 0; t < 25; ++t) {
            auto dist = model.nextTokenDistribution(window);
            std::size_t best = 0;
            for (std::size_t i = 1; i < dist.size(); ++i)
                if (dist[i] > dist[best]) best = i;
            if (pred[best] == kEos) break;
            greedy.push_back(pred[best]);
            window.erase(window.begin());
            window.push_back(pred[best]);
        }
        c.expect(cold.units == greedy, "tau->0 sample differs from greedy at seed " +
                                           std::to_string(s));
    }
    return c;
}

// 8. sweep monotonicity over the temperature grid
Check criterion8() {
    Check c;
    auto corpus = markovCorpus(500, 25, 40, 20, 4, 0.6, 88);
    NGramOptions opts;
    opts.order = 5;
    NGramModel model = trainNGram(corpus, opts);
    SweepOptions sweep_opts;
    sweep_opts.samples_per_temp = 500;
    sweep_opts.max_len = 40;
    sweep_opts.seed = 11;
    SweepCurve curve = temperatureSweep(model, model, defaultTemperatureGrid(), sweep_opts);
    std::vector<double> taus, ppx, verts;
    for (const SweepPoint& p : curve.points) {
        taus.push_back(p.temperature);
        ppx.push_back(p.median_ppx);
        verts.push_back(p.vert);
    }
    double rho_ppx = spearman(taus, ppx);
    double rho_vert = spearman(taus, verts);
    c.expect(rho_ppx >= 0.9, "Spearman rho(tau, median PPX) = " + std::to_string(rho_ppx));
    c.expect(rho_vert <= -0.9, "Spearman rho(tau, VERT) = " + std::to_string(rho_vert));
    return c;
}

// 9. anchors and AUC on handcrafted piecewise-linear curves
Check criterion9() {
    Check c;
    SweepCurve curve;
    curve.points = {{1.0, 100.0, 0.5, 10}, {2.0, 200.0, 0.4, 10}, {3.0, 400.0, 0.2, 10}};
    Anchors a = findAnchors(curve, {150.0, 0.45});
    c.expect(a.t_at_oracle_ppx.has_value() &&
                 std::abs(*a.t_at_oracle_ppx - (1.0 + std::log(1.5) / std::log(2.0))) <= 1e-9,
             "log-interpolated PPX anchor wrong");
    c.expect(a.t_at_oracle_vert.has_value() && std::abs(*a.t_at_oracle_vert - 1.5) <= 1e-9,
             "linear VERT anchor wrong");

    SweepCurve tri;
    tri.points = {{1.0, 100.0, 0.30, 10}, {2.0, 125.0, 0.25, 10}, {3.0, 150.0, 0.20, 10}};
    double auc = aucBetweenAnchors(tri, {100.0, 0.20});
    c.expect(std::abs(auc - 0.125) <= 1e-9, "triangle AUC " + std::to_string(auc) + " != 0.125");

    SweepCurve flat;
    flat.points = {{1.0, 100.0, 0.20, 10}, {2.0, 100.0, 0.20, 10}};
    c.expect(aucBetweenAnchors(flat, {100.0, 0.20}) == 0.0, "coincident curve AUC != 0");

    Anchors none = findAnchors(tri, {50.0, 0.25});
    c.expect(!none.t_at_oracle_ppx.has_value(), "unbracketed PPX anchor should be NOT-COMPUTABLE");
    bool threw = false;
    try {
        aucBetweenAnchors(tri, {50.0, 0.25});
    } catch (const Error&) {
        threw = true;
    }
    c.expect(threw, "AUC with unbracketed anchor must error");
    return c;
}

// 10. spot-the-word on a synthetic lexicon
Check criterion10() {
    Check c;
    LexiconConfig lex;
    lex.n_words = 200;
    lex.vocab_size = 30;
    lex.n_train_utterances = 500;
    lex.seed = 10;
    LexiconBench bench = makeLexiconBench(lex);
    NGramModel model = trainNGram(bench.train_corpus, {});
    PairAccuracyResult res = pairAccuracy(model, bench.pairs);
    c.expect(res.accuracy >= 0.80,
             "spot-the-word accuracy " + std::to_string(res.accuracy) + " < 0.80");

    PairSet ties;
    ties.pairs.push_back({"t0", {1, 2, 3}, {1, 2, 3}});
    c.expect(pairAccuracy(model, ties).accuracy == 0.5, "tie pair does not score 0.5");

    PairSet swapped;
    for (const UnitPair& p : bench.pairs.pairs) {
        UnitPair s = p;
        std::swap(s.positive, s.negative);
        swapped.pairs.push_back(s);
    }
    double a = pairAccuracy(model, bench.pairs).accuracy;
    double b = pairAccuracy(model, swapped).accuracy;
    c.expect(std::abs(a + b - 1.0) <= 1e-14, "column swap does not map accuracy a -> 1-a");
    return c;
}

// 11. edit distance against a brute-force recursive oracle
namespace ed_oracle {
std::vector<std::vector<std::string>> sequencesUpTo(int max_len) {
    const std::vector<std::string> alphabet{"x", "y", "z"};
    std::vector<std::vector<std::string>> out{{}};
    std::vector<std::vector<std::string>> frontier{{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<std::vector<std::string>> next;
        for (const auto& s : frontier)
            for (const auto& sym : alphabet) {
                auto t = s;
                t.push_back(sym);
                next.push_back(t);
                out.push_back(std::move(t));
            }
        frontier = std::move(next);
    }
    return out;
}

// top-down recursion with memo, independent of the iterative implementation
std::int64_t solve(std::span<const std::string> a, std::span<const std::string> b,
                   std::vector<std::int64_t>& memo, std::size_t stride) {
    if (a.empty()) return static_cast<std::int64_t>(b.size());
    if (b.empty()) return static_cast<std::int64_t>(a.size());
    std::int64_t& slot = memo[a.size() * stride + b.size()];
    if (slot >= 0) return slot;
    std::int64_t best = solve(a.subspan(1), b.subspan(1), memo, stride) +
                        (a.front() == b.front() ? 0 : 1);
    best = std::min(best, solve(a.subspan(1), b, memo, stride) + 1);
    best = std::min(best, solve(a, b.subspan(1), memo, stride) + 1);
    slot = best;
    return best;
}

std::int64_t distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::int64_t> memo((a.size() + 1) * (b.size() + 1), -1);
    return solve(a, b, memo, b.size() + 1);
}
}  // namespace ed_oracle

Check criterion11() {
    Check c;
    auto seqs = ed_oracle::sequencesUpTo(6);
    for (const auto& ref : seqs) {
        if (ref.empty()) continue;
        for (const auto& hyp : seqs) {
            EditCounts ec = editDistance(ref, hyp);
            if (ec.distance != ed_oracle::distance(ref, hyp) ||
                ec.distance != ec.substitutions + ec.insertions + ec.deletions) {
                c.expect(false, "editDistance mismatch vs recursive oracle");
                return c;
            }
        }
    }
    auto chars = [](const std::string& w) {
        std::vector<std::string> out;
        for (char ch : w) out.emplace_back(1, ch);
        return out;
    };
    c.expect(editDistance(chars("kitten"), chars("sitting")).distance == 3,
             "kitten/sitting != 3");

    // corpus micro average: edits 2 and 1 over lengths 10 and 5 -> 0.2
    Transcript r1{"u1", {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"}};
    Transcript h1{"u1", {"a", "b", "X", "d", "e", "f", "g", "Y", "i", "j"}};
    Transcript r2{"u2", {"k", "l", "m", "n", "o"}};
    Transcript h2{"u2", {"k", "l", "m", "n"}};
    ErrorRateReport rep = errorRate({r1, r2}, {h1, h2}, TranscriptLevel::Word);
    c.expect(rep.rate == 0.2, "micro-average rate " + std::to_string(rep.rate) + " != 0.2");
    return c;
}

// 12. continuation-temperature self-consistency
Check criterion12() {
    Check c;
    const int ref_len = 50;
    auto corpus = markovCorpus(400, ref_len + 10, ref_len + 20, 18, 4, 0.55, 121);
    NGramOptions opts;
    opts.order = 5;
    NGramModel model = trainNGram(corpus, opts);

    // references are tau=1 samples from the model itself, length-matched
    std::vector<UnitSequence> prompts;
    std::vector<TokenSeq> references;
    std::uint64_t draw = 0;
    while (prompts.size() < 10 && draw < 2000) {
        UnitSequence s = sample(model, 1.0, ref_len + 5, deriveSeed(5150, {121, draw++}));
        if (static_cast<int>(s.units.size()) < ref_len + 5) continue;
        UnitSequence prompt;
        prompt.utt_id = "p" + std::to_string(prompts.size());
        prompt.units.assign(s.units.begin(), s.units.begin() + 5);
        references.emplace_back(s.units.begin() + 5, s.units.begin() + 5 + ref_len);
        prompts.push_back(std::move(prompt));
    }
    c.expect(prompts.size() == 10, "could not draw 10 long reference samples");
    if (!c.ok) return c;

    PickTempOptions popts;
    popts.n_continuations = 10;
    popts.seed = 31337;
    PickTempResult res = selectContinuationTemperature(model, prompts, references,
                                                       defaultTemperatureGrid(), popts);
    // within one grid step of 1.0 on the default grid: {0.9, 1.0, 1.1}
    c.expect(res.selected_temperature >= 0.9 - 1e-12 && res.selected_temperature <= 1.1 + 1e-12,
             "selected temperature " + std::to_string(res.selected_temperature) +
                 " not within one grid step of 1.0");
    return c;
}

// 13. seeded CLI runs are byte-identical across repeats and thread counts
std::string binPath() { return UNITLAB_BIN; }

int runCmd(const std::string& cmd) {
    std::string full = cmd + " >/dev/null 2>&1";
    return std::system(full.c_str());
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

Check criterion13() {
    Check c;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("unitlab_accept_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string bin = binPath();
    std::string cfg = (dir / "cfg.json").string();
    {
        std::ofstream out(cfg);
        out << R"({"corpus": {"n_phones": 5, "embed_dim": 6, "n_utterances": 40,
                   "n_speakers": 2, "within_class_noise": 0.05,
                   "speaker_offset_scale": 0.0, "seed": 13},
                   "lexicon": {"n_words": 40, "vocab_size": 12,
                   "n_train_utterances": 100, "seed": 13}})";
    }

    // Identical invocations (fixed paths), only --threads varies; the work
    // tree is snapshotted after each run.
    fs::path w = dir / "work";
    auto run_stack = [&](const std::string& threads) -> bool {
        fs::remove_all(w);
        fs::create_directories(w);
        std::string t = " --threads " + threads;
        if (runCmd(bin + " synth make --config " + cfg + " --out " + (w / "corpus").string()) != 0)
            return false;
        std::string manifest = (w / "corpus" / "manifest.tsv").string();
        if (runCmd(bin + " quantize-train --manifest " + manifest + " --codebook " +
                   (w / "cb.gslk").string() + " --k 5 --seed 3" + t + " --out " +
                   (w / "train.tsv").string()) != 0)
            return false;
        if (runCmd(bin + " quantize-encode --manifest " + manifest + " --codebook " +
                   (w / "cb.gslk").string() + t + " --out " + (w / "enc.units").string()) != 0)
            return false;
        if (runCmd(bin + " bitrate --units " + (w / "enc.units").string() + " --manifest " +
                   manifest + " --out " + (w / "bitrate.tsv").string()) != 0)
            return false;
        if (runCmd(bin + " abx --items " + (w / "corpus" / "items.item").string() +
                   " --manifest " + manifest + " --mode across --seed 5" + t + " --out " +
                   (w / "abx.tsv").string()) != 0)
            return false;
        if (runCmd(bin + " lm train --units " + (w / "corpus" / "lm_corpus.units").string() +
                   " --model " + (w / "lm.gslm").string()) != 0)
            return false;
        if (runCmd(bin + " lm sample --model " + (w / "lm.gslm").string() +
                   " --temperature 1.1 --seed 17 --n 20 --max-len 30 --out " +
                   (w / "samples.units").string()) != 0)
            return false;
        if (runCmd(bin + " gen sweep --gen-model " + (w / "lm.gslm").string() + " --ref-model " +
                   (w / "lm.gslm").string() +
                   " --grid 0.5,1.0,2.0 --samples-per-temp 50 --max-len 20 --seed 23" + t +
                   " --out " + (w / "sweep.tsv").string()) != 0)
            return false;
        return true;
    };

    auto snapshot = [&](const std::string& tag) {
        fs::copy(w, dir / tag, fs::copy_options::recursive);
    };
    bool ok1 = run_stack("1");
    if (ok1) snapshot("a");
    bool ok2 = run_stack("1");
    if (ok2) snapshot("b");
    bool ok3 = run_stack("8");
    if (ok3) snapshot("c");
    c.expect(ok1 && ok2 && ok3, "CLI pipeline failed");
    if (c.ok) {
        const char* files[] = {"corpus/manifest.tsv", "corpus/gold_units.units",
                               "corpus/items.item",   "corpus/lm_corpus.units",
                               "corpus/pairs.tsv",    "cb.gslk",
                               "train.tsv",           "enc.units",
                               "bitrate.tsv",         "abx.tsv",
                               "lm.gslm",             "samples.units",
                               "sweep.tsv"};
        for (const char* f : files) {
            std::string a = slurp(dir / "a" / f);
            std::string b = slurp(dir / "b" / f);
            std::string d = slurp(dir / "c" / f);
            if (a.empty() || a != b || a != d) {
                c.expect(false, std::string("output differs or empty: ") + f);
                break;
            }
        }
    }
    fs::remove_all(dir);
    return c;
}

}  // namespace

int main() {
    struct Entry {
        int id;
        const char* name;
        std::function<Check()> fn;
    };
    std::vector<Entry> entries = {
        {1, "dedup-footnote-example", criterion1},
        {2, "auto-bleu-brute-force-oracle", criterion2},
        {3, "self-bleu-limits-and-oracle", criterion3},
        {4, "kmeans-three-gaussians-ari", criterion4},
        {5, "abx-separable-random-symmetry", criterion5},
        {6, "bitrate-uniform-and-constant", criterion6},
        {7, "ngram-normalization-chisq-greedy", criterion7},
        {8, "sweep-monotonicity-spearman", criterion8},
        {9, "anchors-and-auc-exactness", criterion9},
        {10, "spot-the-word-synthetic-lexicon", criterion10},
        {11, "edit-distance-oracle-and-micro-average", criterion11},
        {12, "continuation-temperature-self-consistency", criterion12},
        {13, "cli-determinism-across-threads", criterion13},
    };
    int failures = 0;
    for (const Entry& e : entries) {
        auto start = std::chrono::steady_clock::now();
        Check c;
        try {
            c = e.fn();
        } catch (const std::exception& ex) {
            c.ok = false;
            c.detail = std::string("exception: ") + ex.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s  criterion-%02d  %s  (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", e.id, e.name,
                    secs, c.ok ? "" : "  -- ", c.ok ? "" : c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failures;
    }
    if (failures == 0) std::printf("all %zu acceptance criteria passed\n", entries.size());
    else std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
