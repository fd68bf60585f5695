#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "testutil.hpp"
#include "unitlab/error.hpp"
#include "unitlab/io.hpp"
#include "unitlab/rng.hpp"

using namespace unitlab;
using testutil::TempDir;

namespace {

FrameMatrix makeFm(const std::string& id, int rows, int cols, double period_ms, Rng& rng) {
    FrameMatrix fm;
    fm.utt_id = id;
    fm.frame_period_ms = period_ms;
    fm.data.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            fm.data(i, j) = static_cast<double>(static_cast<float>(rng.gaussian()));
    return fm;
}

ErrorKind kindOf(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Format;
}

}  // namespace

TEST_CASE("frame matrix header fields and duration") {
    TempDir dir("io_header");
    FrameMatrix fm;
    fm.utt_id = "u1";
    fm.frame_period_ms = 10.0;
    fm.data.resize(2, 3);
    fm.data << 1, 2, 3, 4, 5, 6;
    writeFrameMatrix(dir / "u1.gslf", fm);
    FrameMatrix back = readFrameMatrix(dir / "u1.gslf");
    CHECK(back.utt_id == "u1");
    CHECK(back.frames() == 2);
    CHECK(back.dim() == 3);
    CHECK(back.durationS() == doctest::Approx(0.02).epsilon(1e-12));
    CHECK(back.data == fm.data);
}

TEST_CASE("frame matrix round-trip is bit-exact for f32-valued data") {
    TempDir dir("io_roundtrip");
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        FrameMatrix fm = makeFm("t" + std::to_string(trial), 1 + static_cast<int>(rng.integer(40)),
                                1 + static_cast<int>(rng.integer(8)), 12.5, rng);
        auto path = dir / (fm.utt_id + ".gslf");
        writeFrameMatrix(path, fm);
        FrameMatrix back = readFrameMatrix(path);
        REQUIRE(back.data.rows() == fm.data.rows());
        REQUIRE(back.data.cols() == fm.data.cols());
        CHECK(back.data == fm.data);  // exact
        CHECK(back.frame_period_ms == fm.frame_period_ms);

        // write-read-write produces identical bytes
        auto path2 = dir / (fm.utt_id + "_2.gslf");
        writeFrameMatrix(path2, back);
        CHECK(testutil::slurp(path) == testutil::slurp(path2));
    }
}

TEST_CASE("frame matrix parse errors are distinct") {
    TempDir dir("io_errors");
    Rng rng(3);
    FrameMatrix fm = makeFm("good", 100, 4, 10.0, rng);
    auto good = dir / "good.gslf";
    writeFrameMatrix(good, fm);
    std::string bytes = testutil::slurp(good);

    SUBCASE("bad magic") {
        std::string bad = bytes;
        bad.replace(0, 4, "XXXX");
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::BadMagic);
    }
    SUBCASE("truncated payload: declared 100 rows, half present") {
        std::string bad = bytes.substr(0, bytes.size() - 50 * 4 * 4);
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::Truncated);
    }
    SUBCASE("zero dims") {
        std::string bad = bytes;
        bad[10] = bad[11] = bad[12] = bad[13] = 0;  // rows := 0
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::ZeroDims);
    }
    SUBCASE("non-finite value") {
        std::string bad = bytes;
        // first payload float := NaN
        bad[18] = 0x00;
        bad[19] = 0x00;
        bad[20] = static_cast<char>(0xc0);
        bad[21] = 0x7f;
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::NonFinite);
    }
    SUBCASE("bad version") {
        std::string bad = bytes;
        bad[4] = 9;
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::BadVersion);
    }
    SUBCASE("trailing bytes") {
        std::string bad = bytes + "zz";
        testutil::spit(dir / "bad.gslf", bad);
        CHECK(kindOf([&] { readFrameMatrix(dir / "bad.gslf"); }) == ErrorKind::Format);
    }
    SUBCASE("missing file") {
        CHECK(kindOf([&] { readFrameMatrix(dir / "nope.gslf"); }) == ErrorKind::Io);
    }
}

TEST_CASE("unit file parsing") {
    TempDir dir("io_units");
    SUBCASE("basic line") {
        testutil::spit(dir / "u.units", "u1\t10 11 21\n");
        auto seqs = readUnitFile(dir / "u.units");
        REQUIRE(seqs.size() == 1);
        CHECK(seqs[0].utt_id == "u1");
        CHECK(seqs[0].units == std::vector<std::int32_t>{10, 11, 21});
    }
    SUBCASE("negative token") {
        testutil::spit(dir / "u.units", "u1\t10 -3\n");
        CHECK(kindOf([&] { readUnitFile(dir / "u.units"); }) == ErrorKind::BadToken);
    }
    SUBCASE("non-integer token") {
        testutil::spit(dir / "u.units", "u1\t10 1.5\n");
        CHECK(kindOf([&] { readUnitFile(dir / "u.units"); }) == ErrorKind::BadToken);
    }
    SUBCASE("duplicate utt_id") {
        testutil::spit(dir / "u.units", "u1\t1\nu1\t2\n");
        CHECK(kindOf([&] { readUnitFile(dir / "u.units"); }) == ErrorKind::DuplicateId);
    }
    SUBCASE("empty unit list") {
        testutil::spit(dir / "u.units", "u1\t\n");
        CHECK(kindOf([&] { readUnitFile(dir / "u.units"); }) == ErrorKind::EmptyField);
    }
    SUBCASE("round-trip preserves order and content") {
        std::vector<UnitSequence> seqs;
        Rng rng(11);
        for (int i = 0; i < 30; ++i) {
            UnitSequence us;
            us.utt_id = "utt" + std::to_string(29 - i);  // non-sorted order
            for (int j = 0; j <= static_cast<int>(rng.integer(12)); ++j)
                us.units.push_back(static_cast<std::int32_t>(rng.integer(1000)));
            seqs.push_back(us);
        }
        writeUnitFile(dir / "rt.units", seqs);
        auto back = readUnitFile(dir / "rt.units");
        REQUIRE(back.size() == seqs.size());
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            CHECK(back[i].utt_id == seqs[i].utt_id);
            CHECK(back[i].units == seqs[i].units);
        }
    }
}

TEST_CASE("manifest parsing and path resolution") {
    TempDir dir("io_manifest");
    testutil::spit(dir / "m.tsv", "u1\tframes/u1.gslf\tspk0\t1.5\nu2\t/abs/u2.gslf\tspk1\t2.0\n");
    auto entries = readManifest(dir / "m.tsv");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].speaker == "spk0");
    CHECK(entries[0].duration_s == 1.5);
    CHECK(resolveFramePath(dir / "m.tsv", entries[0].frame_path) == dir / "frames/u1.gslf");
    CHECK(resolveFramePath(dir / "m.tsv", entries[1].frame_path) ==
          std::filesystem::path("/abs/u2.gslf"));

    testutil::spit(dir / "bad.tsv", "u1\tp\tspk\t-1\n");
    CHECK(kindOf([&] { readManifest(dir / "bad.tsv"); }) == ErrorKind::Format);
}

TEST_CASE("ABX item file round-trip and header skipping") {
    TempDir dir("io_items");
    AbxItemSet set;
    set.items.push_back({"u1", 0.10, 0.25, "ae", "b", "t", "spk0"});
    set.items.push_back({"u2", 0.00, 0.05, "ih", "b", "t", "spk1"});
    writeAbxItemFile(dir / "x.item", set);
    auto back = readAbxItemFile(dir / "x.item");
    REQUIRE(back.items.size() == 2);
    CHECK(back.items[0].utt_id == "u1");
    CHECK(back.items[0].onset_s == 0.10);
    CHECK(back.items[0].center_phone == "ae");
    CHECK(back.items[1].speaker == "spk1");

    testutil::spit(dir / "bad.item", "#file onset offset #phone prev-phone next-phone speaker\nu1 0.2 0.1 a b c s\n");
    CHECK(kindOf([&] { readAbxItemFile(dir / "bad.item"); }) == ErrorKind::Format);
}

TEST_CASE("pair file parsing") {
    TempDir dir("io_pairs");
    PairSet set;
    set.pairs.push_back({"p0", {1, 2, 3}, {1, 2, 4}});
    set.pairs.push_back({"p1", {9}, {8}});
    writePairFile(dir / "p.tsv", set);
    auto back = readPairFile(dir / "p.tsv");
    REQUIRE(back.pairs.size() == 2);
    CHECK(back.pairs[0].positive == std::vector<std::int32_t>{1, 2, 3});
    CHECK(back.pairs[0].negative == std::vector<std::int32_t>{1, 2, 4});

    testutil::spit(dir / "dup.tsv", "p0\t1\t2\np0\t3\t4\n");
    CHECK(kindOf([&] { readPairFile(dir / "dup.tsv"); }) == ErrorKind::DuplicateId);
    testutil::spit(dir / "empty.tsv", "p0\t\t2\n");
    CHECK(kindOf([&] { readPairFile(dir / "empty.tsv"); }) == ErrorKind::EmptyField);
}

TEST_CASE("transcript parsing allows empty hypothesis token lists") {
    TempDir dir("io_tr");
    testutil::spit(dir / "t.tsv", "u1\tthe cat sat\nu2\t\n");
    auto ts = readTranscriptFile(dir / "t.tsv");
    REQUIRE(ts.size() == 2);
    CHECK(ts[0].tokens == std::vector<std::string>{"the", "cat", "sat"});
    CHECK(ts[1].tokens.empty());
}

TEST_CASE("sliceFrames center-time rule") {
    FrameMatrix fm;
    fm.utt_id = "u";
    fm.frame_period_ms = 10.0;
    fm.data.resize(10, 2);
    for (int i = 0; i < 10; ++i) fm.data.row(i) << i, i;

    SUBCASE("onset 0, offset 0.02 keeps frames 0..1") {
        FrameMatrix s = sliceFrames(fm, 0.0, 0.02);
        REQUIRE(s.frames() == 2);
        CHECK(s.data(0, 0) == 0);
        CHECK(s.data(1, 0) == 1);
    }
    SUBCASE("onset 0.005 (inclusive center), offset 0.015 (exclusive) keeps frame 0 only") {
        FrameMatrix s = sliceFrames(fm, 0.005, 0.015);
        REQUIRE(s.frames() == 1);
        CHECK(s.data(0, 0) == 0);
    }
    SUBCASE("full interval returns the whole matrix") {
        FrameMatrix s = sliceFrames(fm, 0.0, fm.durationS());
        CHECK(s.data == fm.data);
    }
    SUBCASE("onset >= offset is a precondition error") {
        CHECK(kindOf([&] { sliceFrames(fm, 0.02, 0.02); }) == ErrorKind::Domain);
    }
    SUBCASE("empty slice is an error, not an empty matrix") {
        CHECK(kindOf([&] { sliceFrames(fm, 0.011, 0.014); }) == ErrorKind::Domain);
    }
    SUBCASE("slices over a partition reproduce all frames exactly once") {
        Rng rng(5);
        for (int trial = 0; trial < 50; ++trial) {
            // random cut points over [0, duration)
            std::vector<double> cuts{0.0, fm.durationS()};
            for (int c = 0; c < 3; ++c) cuts.push_back(rng.uniform() * fm.durationS());
            std::sort(cuts.begin(), cuts.end());
            std::vector<double> collected;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] <= cuts[i]) continue;
                try {
                    FrameMatrix s = sliceFrames(fm, cuts[i], cuts[i + 1]);
                    for (Eigen::Index r = 0; r < s.frames(); ++r) collected.push_back(s.data(r, 0));
                } catch (const Error&) {
                    // interval shorter than a frame: contributes nothing
                }
            }
            REQUIRE(collected.size() == 10);
            for (int i = 0; i < 10; ++i) CHECK(collected[static_cast<std::size_t>(i)] == i);
        }
    }
}
