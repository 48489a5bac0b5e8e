#pragma once

#include <cstdint>
#include <vector>

#include "csaidx/types.hpp"

namespace csaidx {

// Index-set recall of a candidate selection against a reference selection
// (normally the materialized path). Per row: |test ∩ ref| / |ref| over the
// non-sentinel entries; rows whose reference is empty are excluded from the
// aggregates. Percentages are in [0, 100].
struct RecallReport {
    int64_t rows_evaluated = 0;
    double mean_recall = 1.0;
    double min_recall = 1.0;
    double pct_rows_perfect = 100.0;
    double pct_rows_below_99 = 0.0;
    std::vector<double> per_row;  // one entry per evaluated row, (b, t) order

    [[nodiscard]] bool perfect() const {
        return rows_evaluated > 0 && mean_recall == 1.0 && min_recall == 1.0;
    }
};

// Shapes must match exactly; throws std::invalid_argument otherwise.
RecallReport recall(const TopKResult& reference, const TopKResult& test);

}  // namespace csaidx
