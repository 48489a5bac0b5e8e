#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "csaidx/memory_ledger.hpp"
#include "csaidx/types.hpp"
#include "doctest.h"

using namespace csaidx;

namespace {
ProblemDims deploy_dims(int64_t seq) { return ProblemDims::create(1, seq, 4, 64, 128, 512); }
}  // namespace

TEST_CASE("ProblemDims::create derives key blocks and validates") {
    const ProblemDims d = ProblemDims::create(2, 4096, 4, 8, 64, 128);
    CHECK(d.batch == 2);
    CHECK(d.seq_len == 4096);
    CHECK(d.key_blocks == 1024);
    CHECK(d.heads == 8);
    CHECK(d.head_dim == 64);
    CHECK(d.ratio == 4);
    CHECK(d.top_k == 128);
    CHECK(d.q_elems() == 2 * 4096 * 8 * 64);
    CHECK(d.kc_elems() == 2 * 1024 * 64);
    CHECK(d.w_elems() == 2 * 4096 * 8);

    CHECK_THROWS_AS(ProblemDims::create(1, 10, 4, 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ProblemDims::create(0, 4, 4, 1, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ProblemDims::create(1, 4, 4, 0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ProblemDims::create(1, 4, 4, 1, -1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ProblemDims::create(1, 4, 4, 1, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(ProblemDims::create(1, 4, 0, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("TileConfig::validate rejects non-positive extents") {
    CHECK_NOTHROW((TileConfig{1, 1}.validate()));
    CHECK_THROWS_AS((TileConfig{0, 1}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TileConfig{1, 0}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((TileConfig{-3, 4}.validate()), std::invalid_argument);
}

TEST_CASE("per-head intermediate byte model hits the published sizes") {
    // B * S * H_I * T * 4 at the deployment shape (H_I = 64, m = 4).
    CHECK(materialize_bytes(deploy_dims(65536)) == 274877906944ULL);   // 256 GiB
    CHECK(materialize_bytes(deploy_dims(131072)) == 1099511627776ULL); // 1 TiB
    CHECK(materialize_bytes(deploy_dims(262144)) == 4398046511104ULL); // 4 TiB
    CHECK(score_intermediate_bytes(1, 65536, 64, 16384) == 274877906944ULL);
    CHECK(score_intermediate_bytes(1, 1, 1, 1) == 4);
    // The peak counts the intermediate plus its weighted copy.
    CHECK(materialize_peak_bytes(deploy_dims(32768)) == 2 * materialize_bytes(deploy_dims(32768)));
    CHECK(materialize_peak_bytes(deploy_dims(32768)) == 137438953472ULL);  // 128 GiB
}

TEST_CASE("byte model is monotone in every extent") {
    const uint64_t base = score_intermediate_bytes(2, 64, 8, 16);
    CHECK(score_intermediate_bytes(3, 64, 8, 16) > base);
    CHECK(score_intermediate_bytes(2, 65, 8, 16) > base);
    CHECK(score_intermediate_bytes(2, 64, 9, 16) > base);
    CHECK(score_intermediate_bytes(2, 64, 8, 17) > base);
}

TEST_CASE("byte models refuse to wrap on overflow") {
    const int64_t big = int64_t{1} << 62;
    CHECK_THROWS_AS(score_intermediate_bytes(big, big, big, big), std::overflow_error);
    CHECK_THROWS_AS(score_matrix_bytes(big, big, big), std::overflow_error);
    CHECK_THROWS_AS(chunk_tile_bytes(big, big, big), std::overflow_error);
    CHECK_THROWS_AS(run_buffer_bytes(big, big, big), std::overflow_error);
}

TEST_CASE("tile, buffer, and scratch byte models") {
    CHECK(score_matrix_bytes(1, 2048, 512) == 4194304);
    CHECK(chunk_tile_bytes(1, 2048, 8192) == 67108864);  // 64 MiB
    CHECK(chunk_tile_bytes(1, 1, 1) == 4);
    CHECK(chunk_tile_bytes(2, 128, 256) == 262144);
    CHECK(run_buffer_bytes(1, 2048, 512) == uint64_t{2048} * 512 * kTopKEntryBytes);
    // Scratch width saturates at the key-tile width.
    CHECK(tile_scratch_bytes(1, 2048, 8192, 512) == uint64_t{2048} * 512 * kTopKEntryBytes);
    CHECK(tile_scratch_bytes(1, 2048, 256, 512) == uint64_t{2048} * 256 * kTopKEntryBytes);
}

TEST_CASE("chunked peak bound is tile + scratch + running buffer") {
    const TileConfig tile{2048, 8192};
    const uint64_t expect = chunk_tile_bytes(1, 2048, 8192) +
                            tile_scratch_bytes(1, 2048, 8192, 512) +
                            run_buffer_bytes(1, 2048, 512);
    CHECK(chunked_peak_model_bytes(1, tile, 512, false) == expect);
    // The boolean mask tile adds one byte per tile cell, batch free.
    CHECK(chunked_peak_model_bytes(1, tile, 512, true) == expect + 2048ULL * 8192ULL);
    // No dependence on S or T appears anywhere in the signature.
}

TEST_CASE("TopKResult starts fully padded") {
    const ProblemDims d = ProblemDims::create(2, 8, 4, 1, 1, 3);
    TopKResult r = TopKResult::sized(d);
    CHECK(r.batch == 2);
    CHECK(r.seq_len == 8);
    CHECK(r.top_k == 3);
    CHECK(r.indices.size() == 2 * 8 * 3);
    for (int64_t b = 0; b < 2; ++b) {
        for (int64_t t = 0; t < 8; ++t) {
            CHECK(r.valid_count(b, t) == 0);
            for (int64_t e = 0; e < 3; ++e) {
                CHECK(r.index_row(b, t)[e] == kSentinelIndex);
                CHECK(r.value_row(b, t)[e] == -std::numeric_limits<float>::infinity());
            }
        }
    }
    r.index_row(1, 5)[0] = 7;
    r.index_row(1, 5)[1] = 2;
    CHECK(r.valid_count(1, 5) == 2);
    CHECK(r.valid_count(1, 4) == 0);
}

TEST_CASE("MemoryLedger tracks live and peak like a prefix sum") {
    MemoryLedger ledger;
    ledger.set_logging(true);
    std::mt19937_64 rng(11);
    uint64_t live = 0;
    std::vector<uint64_t> held;
    for (int step = 0; step < 500; ++step) {
        if (held.empty() || rng() % 2 == 0) {
            uint64_t bytes = rng() % 4096;
            ledger.allocate("blk", bytes);
            held.push_back(bytes);
        } else {
            ledger.release("blk", held.back());
            held.pop_back();
        }
    }
    // Replay the event log independently and compare.
    uint64_t replay_live = 0;
    uint64_t replay_peak = 0;
    for (const auto& ev : ledger.events()) {
        replay_live = static_cast<uint64_t>(static_cast<int64_t>(replay_live) + ev.delta_bytes);
        replay_peak = std::max(replay_peak, replay_live);
    }
    for (uint64_t b : held) live += b;
    CHECK(ledger.live_bytes() == live);
    CHECK(ledger.live_bytes() == replay_live);
    CHECK(ledger.peak_bytes() == replay_peak);
    CHECK(ledger.peak_bytes() >= ledger.live_bytes());
}

TEST_CASE("MemoryLedger rejects releasing more than is live") {
    MemoryLedger ledger;
    ledger.allocate("a", 16);
    CHECK_THROWS_AS(ledger.release("a", 17), std::logic_error);
    ledger.release("a", 16);
    CHECK(ledger.live_bytes() == 0);
    ledger.reset();
    CHECK(ledger.peak_bytes() == 0);
}

TEST_CASE("LedgerCharge releases once, even across moves") {
    MemoryLedger ledger;
    {
        LedgerCharge a(ledger, "x", 100);
        CHECK(ledger.live_bytes() == 100);
        LedgerCharge b = std::move(a);
        CHECK(ledger.live_bytes() == 100);
        LedgerCharge c;
        c = std::move(b);
        CHECK(ledger.live_bytes() == 100);
        c.release();
        CHECK(ledger.live_bytes() == 0);
        c.release();  // idempotent
        CHECK(ledger.live_bytes() == 0);
    }
    CHECK(ledger.live_bytes() == 0);
    CHECK(ledger.peak_bytes() == 100);
}

TEST_CASE("TopKBuffer charges the running-buffer model and initializes placeholders") {
    MemoryLedger ledger;
    {
        TopKBuffer buf(2, 5, 3, ledger);
        CHECK(ledger.live_bytes() == run_buffer_bytes(2, 5, 3));
        for (int64_t b = 0; b < 2; ++b) {
            for (int64_t i = 0; i < 5; ++i) {
                for (int64_t e = 0; e < 3; ++e) {
                    CHECK(buf.v_row(b, i)[e] == -std::numeric_limits<float>::infinity());
                    CHECK(buf.i_row(b, i)[e] == kSentinelIndex);
                }
            }
        }
    }
    CHECK(ledger.live_bytes() == 0);
}

TEST_CASE("IndexerInputs::validated checks extents and finiteness") {
    const ProblemDims d = ProblemDims::create(1, 4, 4, 2, 3, 1);
    std::vector<float> q(static_cast<size_t>(d.q_elems()), 0.5f);
    std::vector<float> kc(static_cast<size_t>(d.kc_elems()), 0.5f);
    std::vector<float> w(static_cast<size_t>(d.w_elems()), 0.5f);
    CHECK_NOTHROW(IndexerInputs::validated(q, kc, w, d));

    std::vector<float> short_q(q.begin(), q.end() - 1);
    CHECK_THROWS_AS(IndexerInputs::validated(short_q, kc, w, d), std::invalid_argument);

    std::vector<float> bad_w = w;
    bad_w[2] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(IndexerInputs::validated(q, kc, bad_w, d), std::invalid_argument);

    std::vector<float> bad_kc = kc;
    bad_kc[0] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(IndexerInputs::validated(q, bad_kc, w, d), std::invalid_argument);
}
