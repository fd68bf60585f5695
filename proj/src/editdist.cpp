#include "unitlab/editdist.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "unitlab/error.hpp"

namespace unitlab {
namespace {

std::string normalizeToken(const std::string& tok) {
    std::string out;
    out.reserve(tok.size());
    for (unsigned char c : tok) {
        if (std::ispunct(c)) continue;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

std::vector<std::string> levelTokens(const Transcript& t, TranscriptLevel level, bool normalize) {
    std::vector<std::string> tokens;
    for (const std::string& raw : t.tokens) {
        std::string tok = normalize ? normalizeToken(raw) : raw;
        if (tok.empty()) continue;
        if (level == TranscriptLevel::Char) {
            for (std::string& ch : splitUtf8Chars(tok)) tokens.push_back(std::move(ch));
        } else {
            tokens.push_back(std::move(tok));
        }
    }
    return tokens;
}

}  // namespace

std::vector<std::string> splitUtf8Chars(const std::string& s) {
    std::vector<std::string> chars;
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if ((c & 0x80) == 0x00) len = 1;
        else if ((c & 0xe0) == 0xc0) len = 2;
        else if ((c & 0xf0) == 0xe0) len = 3;
        else if ((c & 0xf8) == 0xf0) len = 4;
        if (i + len > s.size()) len = 1;
        for (std::size_t j = 1; j < len; ++j) {
            if ((static_cast<unsigned char>(s[i + j]) & 0xc0) != 0x80) {
                len = 1;
                break;
            }
        }
        chars.push_back(s.substr(i, len));
        i += len;
    }
    return chars;
}

EditCounts editDistance(std::span<const std::string> ref, std::span<const std::string> hyp) {
    require(!ref.empty(), ErrorKind::Domain, "editDistance: empty reference");
    const std::size_t n = ref.size(), m = hyp.size();
    std::vector<std::int32_t> dp((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::int32_t& { return dp[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<std::int32_t>(i);
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::int32_t>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            std::int32_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
            std::int32_t del = at(i - 1, j) + 1;
            std::int32_t ins = at(i, j - 1) + 1;
            at(i, j) = std::min({sub, del, ins});
        }
    }

    EditCounts counts;
    counts.distance = at(n, m);
    // backtrace; ties resolved substitution > deletion > insertion
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) && ref[i - 1] == hyp[j - 1]) {
            --i;
            --j;
        } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
            ++counts.substitutions;
            --i;
            --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            ++counts.deletions;
            --i;
        } else {
            ++counts.insertions;
            --j;
        }
    }
    return counts;
}

ErrorRateReport errorRate(const std::vector<Transcript>& refs, const std::vector<Transcript>& hyps,
                          TranscriptLevel level, bool normalize) {
    require(!refs.empty(), ErrorKind::Domain, "errorRate: empty reference corpus");
    std::map<std::string, const Transcript*> hyp_by_id;
    for (const Transcript& h : hyps) hyp_by_id[h.utt_id] = &h;
    require(hyp_by_id.size() == hyps.size(), ErrorKind::DuplicateId,
            "errorRate: duplicate utt_id in hypotheses");
    std::map<std::string, bool> ref_ids;
    for (const Transcript& r : refs) {
        require(!ref_ids.count(r.utt_id), ErrorKind::DuplicateId,
                "errorRate: duplicate utt_id '" + r.utt_id + "' in references");
        ref_ids[r.utt_id] = true;
    }
    for (const Transcript& h : hyps)
        require(ref_ids.count(h.utt_id) > 0, ErrorKind::Domain,
                "errorRate: hypothesis '" + h.utt_id + "' has no reference");

    ErrorRateReport report;
    for (const Transcript& r : refs) {
        auto found = hyp_by_id.find(r.utt_id);
        require(found != hyp_by_id.end(), ErrorKind::Domain,
                "errorRate: missing hypothesis for '" + r.utt_id + "'");
        std::vector<std::string> ref_tokens = levelTokens(r, level, normalize);
        std::vector<std::string> hyp_tokens = levelTokens(*found->second, level, normalize);
        require(!ref_tokens.empty(), ErrorKind::EmptyField,
                "errorRate: empty reference transcript '" + r.utt_id + "'");
        EditCounts c = editDistance(ref_tokens, hyp_tokens);
        report.substitutions += c.substitutions;
        report.insertions += c.insertions;
        report.deletions += c.deletions;
        report.ref_token_count += static_cast<std::int64_t>(ref_tokens.size());
    }
    report.rate = static_cast<double>(report.substitutions + report.insertions + report.deletions) /
                  static_cast<double>(report.ref_token_count);
    return report;
}

TranscriptLevel transcriptLevelFromString(const std::string& name) {
    if (name == "phone") return TranscriptLevel::Phone;
    if (name == "char") return TranscriptLevel::Char;
    if (name == "word") return TranscriptLevel::Word;
    fail(ErrorKind::Domain, "unknown level '" + name + "' (phone|char|word)");
}

std::string toString(TranscriptLevel level) {
    switch (level) {
        case TranscriptLevel::Phone: return "phone";
        case TranscriptLevel::Char: return "char";
        default: return "word";
    }
}

}  // namespace unitlab
