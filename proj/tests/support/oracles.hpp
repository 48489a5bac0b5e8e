#pragma once

// Test-side reference implementations, written independently of the library
// kernels so the two sides can disagree. Everything here favors obviousness
// over speed: straight loops, full sorts, explicit enumeration.

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "csaidx/half.hpp"
#include "csaidx/score.hpp"
#include "csaidx/topk.hpp"
#include "csaidx/types.hpp"

namespace testsupport {

// Full [B, S, T] score matrix by the definition: for every (b, t, j), walk
// heads in ascending h, accumulate the dot in ascending d, rectify, weight,
// add. The emulated mode rounds through binary16 after the dot and after each
// head's add, mirroring the documented rounding points.
inline std::vector<float> ref_score_matrix(const csaidx::IndexerInputs& in,
                                           const csaidx::ProblemDims& d,
                                           csaidx::AccumulationMode mode) {
    const bool fp16 = (mode == csaidx::AccumulationMode::fp16_emulated);
    std::vector<float> out(static_cast<size_t>(d.batch * d.seq_len * d.key_blocks));
    for (int64_t b = 0; b < d.batch; ++b) {
        for (int64_t t = 0; t < d.seq_len; ++t) {
            const float* wrow = in.w.data() + (b * d.seq_len + t) * d.heads;
            for (int64_t j = 0; j < d.key_blocks; ++j) {
                const float* krow = in.kc.data() + (b * d.key_blocks + j) * d.head_dim;
                float acc = 0.0f;
                for (int64_t h = 0; h < d.heads; ++h) {
                    const float* qrow =
                        in.q.data() + ((b * d.seq_len + t) * d.heads + h) * d.head_dim;
                    float dot = 0.0f;
                    for (int64_t dd = 0; dd < d.head_dim; ++dd) {
                        dot = dot + qrow[dd] * krow[dd];
                    }
                    if (fp16) dot = csaidx::half_round(dot);
                    const float rect = dot < 0.0f ? 0.0f : dot;
                    acc = acc + wrow[h] * rect;
                    if (fp16) acc = csaidx::half_round(acc);
                }
                out[static_cast<size_t>((b * d.seq_len + t) * d.key_blocks + j)] = acc;
            }
        }
    }
    return out;
}

// Causal legality by enumeration: block j covers tokens [j*m, (j+1)*m) and is
// legal for query t only when its last token is visible.
inline bool ref_block_legal(int64_t block, int64_t t, int64_t ratio) {
    return (block + 1) * ratio - 1 <= t;
}

inline int64_t ref_legal_count(int64_t t, int64_t ratio, int64_t key_blocks) {
    int64_t n = 0;
    while (n < key_blocks && ref_block_legal(n, t, ratio)) ++n;
    return n;
}

// Top-min(k, legal) of one row by full stable sort on descending score.
// Stability supplies the ties-to-smaller-index rule without restating the
// library's comparator.
inline std::vector<csaidx::ScoredIndex> ref_sort_topk(std::span<const float> row,
                                                      int64_t k, int64_t legal) {
    std::vector<csaidx::ScoredIndex> all;
    all.reserve(static_cast<size_t>(legal));
    for (int64_t j = 0; j < legal; ++j) {
        all.push_back({row[static_cast<size_t>(j)], j});
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const csaidx::ScoredIndex& a, const csaidx::ScoredIndex& b) {
                         return a.score > b.score;
                     });
    if (std::cmp_less(k, all.size())) all.resize(static_cast<size_t>(k));
    return all;
}

// Random tile extent in [1, hi], biased toward small values and exact bounds.
inline int64_t random_extent(std::mt19937_64& rng, int64_t hi) {
    std::uniform_int_distribution<int> pick(0, 4);
    switch (pick(rng)) {
        case 0: return 1;
        case 1: return hi;
        default: {
            std::uniform_int_distribution<int64_t> d(1, hi);
            return d(rng);
        }
    }
}

}  // namespace testsupport
