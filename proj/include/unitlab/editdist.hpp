#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unitlab/types.hpp"

namespace unitlab {

struct EditCounts {
    std::int64_t distance = 0;
    std::int64_t substitutions = 0;
    std::int64_t insertions = 0;
    std::int64_t deletions = 0;
};

// Unit-cost Levenshtein with S/I/D from one optimal backtrace (tie order:
// substitution, deletion, insertion). The reference must be non-empty.
EditCounts editDistance(std::span<const std::string> ref, std::span<const std::string> hyp);

struct ErrorRateReport {
    std::int64_t substitutions = 0;
    std::int64_t insertions = 0;
    std::int64_t deletions = 0;
    std::int64_t ref_token_count = 0;
    double rate = 0.0;  // (S+I+D) / N; may exceed 1 with many insertions
};

// Micro-averaged corpus error rate: total edits over total reference tokens.
// Char level splits word tokens into code points, inter-word spaces excluded.
// normalize=true lower-cases ASCII and strips punctuation characters first.
ErrorRateReport errorRate(const std::vector<Transcript>& refs, const std::vector<Transcript>& hyps,
                          TranscriptLevel level, bool normalize = false);

TranscriptLevel transcriptLevelFromString(const std::string& name);
std::string toString(TranscriptLevel level);

// UTF-8 code-point split; bytes that do not form valid sequences are kept as
// single-byte tokens.
std::vector<std::string> splitUtf8Chars(const std::string& s);

}  // namespace unitlab
