#include "unitlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "unitlab/error.hpp"
#include "unitlab/format.hpp"

namespace unitlab {
namespace {

constexpr char kFrameMagic[4] = {'G', 'S', 'L', 'F'};
constexpr std::uint16_t kFrameVersion = 1;

// -- little-endian primitives -------------------------------------------------

void putU16(std::string& buf, std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void putU32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void putF32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    putU32(buf, bits);
}

class ByteReader {
  public:
    ByteReader(const std::filesystem::path& path, std::string data)
        : path_(path.string()), data_(std::move(data)) {}

    std::uint16_t u16() { return static_cast<std::uint16_t>(byte() | (byte() << 8)); }

    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }

    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    void raw(char* out, std::size_t n) {
        if (pos_ + n > data_.size())
            fail(ErrorKind::Truncated, path_ + ": truncated (needed " + std::to_string(n) +
                                           " more bytes at offset " + std::to_string(pos_) + ")");
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    const std::string& path() const { return path_; }

  private:
    std::uint32_t byte() {
        if (pos_ >= data_.size()) fail(ErrorKind::Truncated, path_ + ": truncated header/payload");
        return static_cast<unsigned char>(data_[pos_++]);
    }

    std::string path_;
    std::string data_;
    std::size_t pos_ = 0;
};

std::string slurpBinary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void writeBinary(const std::filesystem::path& path, const std::string& buf) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// -- text helpers -------------------------------------------------------------

bool skipLine(const std::string& line) {
    return line.empty() || line[0] == '#';
}

std::vector<std::string> splitFields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> splitTokens(const std::string& field) {
    std::vector<std::string> tokens;
    std::istringstream ss(field);
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    return tokens;
}

std::int32_t parseUnitId(const std::string& tok, const std::string& where) {
    std::int32_t value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || value < 0)
        fail(ErrorKind::BadToken, where + ": bad unit ID '" + tok + "' (non-negative integer required)");
    return value;
}

double parseReal(const std::string& tok, const std::string& where) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::BadToken, where + ": bad numeric field '" + tok + "'");
    }
}

std::vector<std::string> readLines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::ofstream openTextOut(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    return out;
}

}  // namespace

// -- frame matrices -----------------------------------------------------------

FrameMatrix readFrameMatrix(const std::filesystem::path& path) {
    return readFrameMatrix(path, path.stem().string());
}

FrameMatrix readFrameMatrix(const std::filesystem::path& path, const std::string& utt_id) {
    ByteReader r(path, slurpBinary(path));
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kFrameMagic, 4) != 0)
        fail(ErrorKind::BadMagic, path.string() + ": bad magic (expected GSLF)");
    std::uint16_t version = r.u16();
    if (version != kFrameVersion)
        fail(ErrorKind::BadVersion, path.string() + ": unsupported version " + std::to_string(version));
    float period = r.f32();
    std::uint32_t rows = r.u32();
    std::uint32_t cols = r.u32();
    if (rows == 0 || cols == 0)
        fail(ErrorKind::ZeroDims, path.string() + ": zero rows or cols");
    if (!(period > 0.0f) || !std::isfinite(period))
        fail(ErrorKind::ZeroDims, path.string() + ": frame period must be a positive finite value");
    std::size_t need = static_cast<std::size_t>(rows) * cols * 4;
    if (r.remaining() < need)
        fail(ErrorKind::Truncated, path.string() + ": declared " + std::to_string(rows) + "x" +
                                       std::to_string(cols) + " but payload is short");
    FrameMatrix fm;
    fm.utt_id = utt_id;
    fm.frame_period_ms = static_cast<double>(period);
    fm.data.resize(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j) {
            float v = r.f32();
            if (!std::isfinite(v))
                fail(ErrorKind::NonFinite, path.string() + ": non-finite value at (" +
                                               std::to_string(i) + "," + std::to_string(j) + ")");
            fm.data(i, j) = static_cast<double>(v);
        }
    }
    if (r.remaining() != 0)
        fail(ErrorKind::Format, path.string() + ": trailing bytes after payload");
    return fm;
}

void writeFrameMatrix(const std::filesystem::path& path, const FrameMatrix& fm) {
    require(fm.data.rows() >= 1 && fm.data.cols() >= 1, ErrorKind::ZeroDims,
            "writeFrameMatrix: empty matrix for " + fm.utt_id);
    require(fm.frame_period_ms > 0.0, ErrorKind::ZeroDims,
            "writeFrameMatrix: non-positive frame period for " + fm.utt_id);
    require(fm.data.allFinite(), ErrorKind::NonFinite,
            "writeFrameMatrix: non-finite values in " + fm.utt_id);
    std::string buf;
    buf.reserve(18 + static_cast<std::size_t>(fm.data.size()) * 4);
    buf.append(kFrameMagic, 4);
    putU16(buf, kFrameVersion);
    putF32(buf, static_cast<float>(fm.frame_period_ms));
    putU32(buf, static_cast<std::uint32_t>(fm.data.rows()));
    putU32(buf, static_cast<std::uint32_t>(fm.data.cols()));
    for (Eigen::Index i = 0; i < fm.data.rows(); ++i)
        for (Eigen::Index j = 0; j < fm.data.cols(); ++j)
            putF32(buf, static_cast<float>(fm.data(i, j)));
    writeBinary(path, buf);
}

// -- unit files ---------------------------------------------------------------

std::vector<UnitSequence> readUnitFile(const std::filesystem::path& path) {
    std::vector<UnitSequence> seqs;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (const std::string& line : readLines(path)) {
        ++lineno;
        if (skipLine(line)) continue;
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = splitFields(line, '\t');
        if (fields.size() != 2 || fields[0].empty())
            fail(ErrorKind::Format, where + ": expected `utt_id\\t<unit IDs>`");
        if (!seen.insert(fields[0]).second)
            fail(ErrorKind::DuplicateId, where + ": duplicate utt_id '" + fields[0] + "'");
        UnitSequence seq;
        seq.utt_id = fields[0];
        for (const std::string& tok : splitTokens(fields[1]))
            seq.units.push_back(parseUnitId(tok, where));
        if (seq.units.empty())
            fail(ErrorKind::EmptyField, where + ": empty unit list for '" + seq.utt_id + "'");
        seqs.push_back(std::move(seq));
    }
    return seqs;
}

void writeUnitFile(std::ostream& out, const std::vector<UnitSequence>& seqs) {
    for (const UnitSequence& seq : seqs) {
        out << seq.utt_id << '\t';
        for (std::size_t i = 0; i < seq.units.size(); ++i) {
            if (i > 0) out << ' ';
            out << seq.units[i];
        }
        out << '\n';
    }
}

void writeUnitFile(const std::filesystem::path& path, const std::vector<UnitSequence>& seqs) {
    auto out = openTextOut(path);
    writeUnitFile(out, seqs);
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// -- manifests ----------------------------------------------------------------

std::vector<ManifestEntry> readManifest(const std::filesystem::path& path) {
    std::vector<ManifestEntry> entries;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (const std::string& line : readLines(path)) {
        ++lineno;
        if (skipLine(line)) continue;
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = splitFields(line, '\t');
        if (fields.size() != 4 || fields[0].empty() || fields[1].empty() || fields[2].empty())
            fail(ErrorKind::Format, where + ": expected `utt_id\\tframe_path\\tspeaker\\tduration_s`");
        if (!seen.insert(fields[0]).second)
            fail(ErrorKind::DuplicateId, where + ": duplicate utt_id '" + fields[0] + "'");
        ManifestEntry e;
        e.utt_id = fields[0];
        e.frame_path = fields[1];
        e.speaker = fields[2];
        e.duration_s = parseReal(fields[3], where);
        if (!(e.duration_s > 0.0) || !std::isfinite(e.duration_s))
            fail(ErrorKind::Format, where + ": duration must be positive");
        entries.push_back(std::move(e));
    }
    return entries;
}

void writeManifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    auto out = openTextOut(path);
    for (const ManifestEntry& e : entries)
        out << e.utt_id << '\t' << e.frame_path << '\t' << e.speaker << '\t'
            << formatDouble(e.duration_s) << '\n';
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

std::filesystem::path resolveFramePath(const std::filesystem::path& manifest_path,
                                       const std::string& frame_path) {
    std::filesystem::path p(frame_path);
    if (p.is_absolute()) return p;
    return manifest_path.parent_path() / p;
}

// -- ABX item files -----------------------------------------------------------

AbxItemSet readAbxItemFile(const std::filesystem::path& path) {
    AbxItemSet set;
    std::size_t lineno = 0;
    for (const std::string& line : readLines(path)) {
        ++lineno;
        if (skipLine(line)) continue;  // the '#file ...' header is a comment line
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto cols = splitTokens(line);
        if (cols.size() != 7)
            fail(ErrorKind::Format,
                 where + ": expected 7 columns `file onset offset phone prev next speaker`");
        AbxItem item;
        item.utt_id = cols[0];
        item.onset_s = parseReal(cols[1], where);
        item.offset_s = parseReal(cols[2], where);
        item.center_phone = cols[3];
        item.prev_phone = cols[4];
        item.next_phone = cols[5];
        item.speaker = cols[6];
        if (!(item.onset_s >= 0.0) || !(item.onset_s < item.offset_s))
            fail(ErrorKind::Format, where + ": need 0 <= onset < offset");
        set.items.push_back(std::move(item));
    }
    return set;
}

void writeAbxItemFile(const std::filesystem::path& path, const AbxItemSet& items) {
    auto out = openTextOut(path);
    out << "#file onset offset #phone prev-phone next-phone speaker\n";
    for (const AbxItem& it : items.items)
        out << it.utt_id << ' ' << formatDouble(it.onset_s) << ' ' << formatDouble(it.offset_s)
            << ' ' << it.center_phone << ' ' << it.prev_phone << ' ' << it.next_phone << ' '
            << it.speaker << '\n';
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// -- pair files ---------------------------------------------------------------

PairSet readPairFile(const std::filesystem::path& path) {
    PairSet set;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (const std::string& line : readLines(path)) {
        ++lineno;
        if (skipLine(line)) continue;
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = splitFields(line, '\t');
        if (fields.size() != 3 || fields[0].empty())
            fail(ErrorKind::Format, where + ": expected `pair_id\\t<positive>\\t<negative>`");
        if (!seen.insert(fields[0]).second)
            fail(ErrorKind::DuplicateId, where + ": duplicate pair_id '" + fields[0] + "'");
        UnitPair pair;
        pair.pair_id = fields[0];
        for (const std::string& tok : splitTokens(fields[1]))
            pair.positive.push_back(parseUnitId(tok, where));
        for (const std::string& tok : splitTokens(fields[2]))
            pair.negative.push_back(parseUnitId(tok, where));
        if (pair.positive.empty() || pair.negative.empty())
            fail(ErrorKind::EmptyField, where + ": empty pair member in '" + pair.pair_id + "'");
        set.pairs.push_back(std::move(pair));
    }
    return set;
}

void writePairFile(const std::filesystem::path& path, const PairSet& pairs) {
    auto out = openTextOut(path);
    for (const UnitPair& p : pairs.pairs) {
        out << p.pair_id << '\t';
        for (std::size_t i = 0; i < p.positive.size(); ++i)
            out << (i ? " " : "") << p.positive[i];
        out << '\t';
        for (std::size_t i = 0; i < p.negative.size(); ++i)
            out << (i ? " " : "") << p.negative[i];
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// -- transcripts ----------------------------------------------------------------

std::vector<Transcript> readTranscriptFile(const std::filesystem::path& path) {
    std::vector<Transcript> ts;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (const std::string& line : readLines(path)) {
        ++lineno;
        if (skipLine(line)) continue;
        std::string where = path.string() + ":" + std::to_string(lineno);
        auto fields = splitFields(line, '\t');
        if (fields.empty() || fields.size() > 2 || fields[0].empty())
            fail(ErrorKind::Format, where + ": expected `utt_id\\t<tokens>`");
        if (!seen.insert(fields[0]).second)
            fail(ErrorKind::DuplicateId, where + ": duplicate utt_id '" + fields[0] + "'");
        Transcript t;
        t.utt_id = fields[0];
        if (fields.size() == 2) t.tokens = splitTokens(fields[1]);
        ts.push_back(std::move(t));
    }
    return ts;
}

void writeTranscriptFile(const std::filesystem::path& path, const std::vector<Transcript>& ts) {
    auto out = openTextOut(path);
    for (const Transcript& t : ts) {
        out << t.utt_id << '\t';
        for (std::size_t i = 0; i < t.tokens.size(); ++i)
            out << (i ? " " : "") << t.tokens[i];
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "short write to " + path.string());
}

// -- slicing --------------------------------------------------------------------

FrameMatrix sliceFrames(const FrameMatrix& fm, double onset_s, double offset_s) {
    require(onset_s >= 0.0 && onset_s < offset_s, ErrorKind::Domain,
            "sliceFrames: need 0 <= onset < offset (got " + std::to_string(onset_s) + ", " +
                std::to_string(offset_s) + ")");
    require(offset_s <= fm.durationS() + 1e-9, ErrorKind::Domain,
            "sliceFrames: offset " + std::to_string(offset_s) + " beyond duration of " + fm.utt_id);
    double period_s = fm.frame_period_ms / 1000.0;
    Eigen::Index first = -1, last = -1;  // [first, last]
    for (Eigen::Index i = 0; i < fm.frames(); ++i) {
        double center = (static_cast<double>(i) + 0.5) * period_s;
        if (center >= onset_s && center < offset_s) {
            if (first < 0) first = i;
            last = i;
        } else if (first >= 0) {
            break;  // centers are increasing
        }
    }
    if (first < 0)
        fail(ErrorKind::Domain, "sliceFrames: interval [" + std::to_string(onset_s) + ", " +
                                    std::to_string(offset_s) + ") contains no frame center in " +
                                    fm.utt_id);
    FrameMatrix out;
    out.utt_id = fm.utt_id;
    out.frame_period_ms = fm.frame_period_ms;
    out.data = fm.data.middleRows(first, last - first + 1);
    return out;
}

}  // namespace unitlab
