#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace unitlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// One utterance of frame embeddings; frames are rows. Values are stored as
// 32-bit floats on disk and widened to doubles in memory.
struct FrameMatrix {
    std::string utt_id;
    double frame_period_ms = 0.0;
    Matrix data;  // T x D

    Eigen::Index frames() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }
    double durationS() const { return static_cast<double>(data.rows()) * frame_period_ms / 1000.0; }
};

struct UnitSequence {
    std::string utt_id;
    std::vector<std::int32_t> units;
    std::optional<double> duration_s;
};

enum class TranscriptLevel { Phone, Char, Word };

struct Transcript {
    std::string utt_id;
    std::vector<std::string> tokens;
};

struct AbxItem {
    std::string utt_id;
    double onset_s = 0.0;
    double offset_s = 0.0;
    std::string center_phone;
    std::string prev_phone;
    std::string next_phone;
    std::string speaker;
};

struct AbxItemSet {
    std::vector<AbxItem> items;
};

struct UnitPair {
    std::string pair_id;
    std::vector<std::int32_t> positive;
    std::vector<std::int32_t> negative;
};

struct PairSet {
    std::vector<UnitPair> pairs;
};

struct ManifestEntry {
    std::string utt_id;
    std::string frame_path;
    std::string speaker;
    double duration_s = 0.0;
};

}  // namespace unitlab
