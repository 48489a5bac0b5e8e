#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "csaidx/recall.hpp"
#include "csaidx/synth.hpp"
#include "csaidx/tensor_io.hpp"
#include "csaidx/types.hpp"
#include "doctest.h"

using namespace csaidx;

namespace {

void set_row(TopKResult& r, int64_t b, int64_t t, const std::vector<int64_t>& idx) {
    for (size_t e = 0; e < idx.size(); ++e) {
        r.index_row(b, t)[e] = idx[e];
        r.value_row(b, t)[e] = 1.0f;
    }
}

TopKResult empty_result(const ProblemDims& d) { return TopKResult::sized(d); }

}  // namespace

TEST_CASE("recall counts index overlap per evaluated row") {
    const ProblemDims d = ProblemDims::create(1, 4, 1, 1, 1, 3);
    TopKResult ref = empty_result(d);
    TopKResult test = empty_result(d);

    // Row 1: full agreement. Row 2: two of three reference entries hit.
    set_row(ref, 0, 1, {4, 7});
    set_row(test, 0, 1, {7, 4});
    set_row(ref, 0, 2, {0, 1, 2});
    set_row(test, 0, 2, {0, 5, 1});

    const RecallReport rep = recall(ref, test);
    CHECK(rep.rows_evaluated == 2);  // rows 0 and 3 have empty references
    REQUIRE(rep.per_row.size() == 2);
    CHECK(rep.per_row[0] == 1.0);
    CHECK(rep.per_row[1] == doctest::Approx(2.0 / 3.0));
    CHECK(rep.mean_recall == doctest::Approx(5.0 / 6.0));
    CHECK(rep.min_recall == doctest::Approx(2.0 / 3.0));
    CHECK(rep.pct_rows_perfect == doctest::Approx(50.0));
    CHECK(rep.pct_rows_below_99 == doctest::Approx(50.0));
    CHECK_FALSE(rep.perfect());
}

TEST_CASE("identical selections are perfect") {
    const ProblemDims d = ProblemDims::create(2, 8, 4, 1, 1, 2);
    TopKResult ref = empty_result(d);
    set_row(ref, 0, 3, {0});
    set_row(ref, 0, 7, {1, 0});
    set_row(ref, 1, 7, {0, 1});
    const RecallReport rep = recall(ref, ref);
    CHECK(rep.rows_evaluated == 3);
    CHECK(rep.mean_recall == 1.0);
    CHECK(rep.min_recall == 1.0);
    CHECK(rep.pct_rows_perfect == 100.0);
    CHECK(rep.pct_rows_below_99 == 0.0);
    CHECK(rep.perfect());
}

TEST_CASE("an all-sentinel reference evaluates nothing and is not perfect") {
    const ProblemDims d = ProblemDims::create(1, 4, 4, 1, 1, 2);
    const TopKResult ref = empty_result(d);
    const RecallReport rep = recall(ref, ref);
    CHECK(rep.rows_evaluated == 0);
    CHECK_FALSE(rep.perfect());
}

TEST_CASE("missing everything scores zero") {
    const ProblemDims d = ProblemDims::create(1, 2, 1, 1, 1, 2);
    TopKResult ref = empty_result(d);
    TopKResult test = empty_result(d);
    set_row(ref, 0, 1, {0, 1});
    const RecallReport rep = recall(ref, test);
    CHECK(rep.rows_evaluated == 1);
    CHECK(rep.mean_recall == 0.0);
    CHECK(rep.min_recall == 0.0);
    CHECK(rep.pct_rows_perfect == 0.0);
    CHECK(rep.pct_rows_below_99 == 100.0);
}

TEST_CASE("shape mismatches are rejected") {
    const ProblemDims a = ProblemDims::create(1, 4, 1, 1, 1, 3);
    const ProblemDims b = ProblemDims::create(1, 4, 1, 1, 1, 2);
    const ProblemDims c = ProblemDims::create(1, 8, 1, 1, 1, 3);
    const TopKResult ra = empty_result(a);
    CHECK_THROWS_AS(recall(ra, empty_result(b)), std::invalid_argument);
    CHECK_THROWS_AS(recall(ra, empty_result(c)), std::invalid_argument);
}

TEST_CASE("tensor dump round-trips through a stream") {
    const ProblemDims d = ProblemDims::create(1, 8, 4, 2, 3, 2);
    const auto in = generate_inputs({d, 17, 7168});
    std::stringstream ss;
    write_inputs(ss, in, d);

    const std::string blob = ss.str();
    CHECK(blob.size() == 3 * 32 + sizeof(float) * (in.q.size() + in.kc.size() + in.w.size()));

    // First header, byte by byte: magic, little-endian version, tag, rank.
    REQUIRE(blob.size() >= 32);
    CHECK(blob.substr(0, 4) == "CSAT");
    CHECK(static_cast<uint8_t>(blob[4]) == 1);
    CHECK(static_cast<uint8_t>(blob[5]) == 0);
    CHECK(static_cast<uint8_t>(blob[6]) == 0);
    CHECK(static_cast<uint8_t>(blob[7]) == 0);
    CHECK(static_cast<uint8_t>(blob[8]) == 0);   // queries tag
    CHECK(static_cast<uint8_t>(blob[9]) == 4);   // rank
    CHECK(static_cast<uint8_t>(blob[12]) == 1);  // dims[0] = batch, LE low byte
    CHECK(static_cast<uint8_t>(blob[16]) == 8);  // dims[1] = seq

    const auto sections = read_sections(ss);
    REQUIRE(sections.size() == 3);
    CHECK(sections[0].tag == 0);
    CHECK(sections[0].rank == 4);
    CHECK(sections[0].dims[0] == 1);
    CHECK(sections[0].dims[1] == 8);
    CHECK(sections[0].dims[2] == 2);
    CHECK(sections[0].dims[3] == 3);
    CHECK(sections[0].data == in.q);
    CHECK(sections[1].tag == 1);
    CHECK(sections[1].rank == 3);
    CHECK(sections[1].dims[0] == 1);
    CHECK(sections[1].dims[1] == 2);  // key blocks
    CHECK(sections[1].dims[2] == 3);
    CHECK(sections[1].data == in.kc);
    CHECK(sections[2].tag == 2);
    CHECK(sections[2].rank == 3);
    CHECK(sections[2].data == in.w);
}

TEST_CASE("tensor dump round-trips through a file and reports its size") {
    const ProblemDims d = ProblemDims::create(1, 8, 4, 2, 3, 2);
    const auto in = generate_inputs({d, 17, 7168});
    const std::string path = "io_roundtrip.bin";
    const uint64_t bytes = write_inputs_file(path, in, d);
    CHECK(bytes == 3 * 32 + sizeof(float) * (in.q.size() + in.kc.size() + in.w.size()));

    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    const auto sections = read_sections(is);
    REQUIRE(sections.size() == 3);
    CHECK(sections[0].data == in.q);
    CHECK(sections[1].data == in.kc);
    CHECK(sections[2].data == in.w);
    std::remove(path.c_str());
}

TEST_CASE("malformed dumps are rejected") {
    const ProblemDims d = ProblemDims::create(1, 4, 4, 1, 1, 1);
    const auto in = generate_inputs({d, 1, 7168});
    std::stringstream ss;
    write_inputs(ss, in, d);
    const std::string blob = ss.str();

    SUBCASE("bad magic") {
        std::string bad = blob;
        bad[0] = 'X';
        std::stringstream is(bad);
        CHECK_THROWS_AS(read_sections(is), std::runtime_error);
    }
    SUBCASE("unsupported version") {
        std::string bad = blob;
        bad[4] = 9;
        std::stringstream is(bad);
        CHECK_THROWS_AS(read_sections(is), std::runtime_error);
    }
    SUBCASE("truncated payload") {
        std::stringstream is(blob.substr(0, blob.size() - 3));
        CHECK_THROWS_AS(read_sections(is), std::runtime_error);
    }
    SUBCASE("truncated header") {
        // Section 0 is 32 + 16 bytes; cutting at 50 leaves two stray bytes
        // where the next header should start.
        std::stringstream is(blob.substr(0, 50));
        CHECK_THROWS_AS(read_sections(is), std::runtime_error);
    }
}
