#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "unitlab/types.hpp"

namespace unitlab {

// Binary frame-matrix format, little-endian:
//   magic "GSLF" | version u16 = 1 | frame_period_ms f32 | rows u32 | cols u32
//   | rows*cols f32, row-major.
FrameMatrix readFrameMatrix(const std::filesystem::path& path);
FrameMatrix readFrameMatrix(const std::filesystem::path& path, const std::string& utt_id);
void writeFrameMatrix(const std::filesystem::path& path, const FrameMatrix& fm);

// Unit file: one utterance per line, `<utt_id>\t<space-separated unit IDs>`,
// UTF-8, LF endings. Lines starting with '#' and blank lines are skipped.
std::vector<UnitSequence> readUnitFile(const std::filesystem::path& path);
void writeUnitFile(const std::filesystem::path& path, const std::vector<UnitSequence>& seqs);
void writeUnitFile(std::ostream& out, const std::vector<UnitSequence>& seqs);

// Manifest: `utt_id\tframe_file_path\tspeaker\tduration_s`. Relative frame
// paths are resolved against the manifest's directory by resolveFramePath.
std::vector<ManifestEntry> readManifest(const std::filesystem::path& path);
void writeManifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::filesystem::path resolveFramePath(const std::filesystem::path& manifest_path,
                                       const std::string& frame_path);

// ABX item file: header `#file onset offset #phone prev-phone next-phone
// speaker`, then one space-separated row per item.
AbxItemSet readAbxItemFile(const std::filesystem::path& path);
void writeAbxItemFile(const std::filesystem::path& path, const AbxItemSet& items);

// Pair file: `pair_id\t<positive tokens>\t<negative tokens>`, tokens are
// space-separated unit IDs.
PairSet readPairFile(const std::filesystem::path& path);
void writePairFile(const std::filesystem::path& path, const PairSet& pairs);

// Transcript file: `utt_id\t<space-separated tokens>`. The token field may be
// empty (an empty hypothesis); reference emptiness is checked by errorRate.
std::vector<Transcript> readTranscriptFile(const std::filesystem::path& path);
void writeTranscriptFile(const std::filesystem::path& path, const std::vector<Transcript>& ts);

// Frames whose center time (i + 0.5) * period falls in [onset_s, offset_s).
// An interval containing no frame center is an error.
FrameMatrix sliceFrames(const FrameMatrix& fm, double onset_s, double offset_s);

}  // namespace unitlab
