#include "csaidx/recall.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace csaidx {

RecallReport recall(const TopKResult& reference, const TopKResult& test) {
    if (reference.batch != test.batch || reference.seq_len != test.seq_len ||
        reference.top_k != test.top_k) {
        throw std::invalid_argument("recall: shape mismatch between reference and test");
    }

    RecallReport report;
    report.min_recall = 1.0;
    double sum = 0.0;
    int64_t perfect = 0;
    int64_t below99 = 0;

    std::vector<int64_t> ref_set;
    std::vector<int64_t> test_set;
    for (int64_t b = 0; b < reference.batch; ++b) {
        for (int64_t t = 0; t < reference.seq_len; ++t) {
            const int64_t nref = reference.valid_count(b, t);
            if (nref == 0) continue;  // nothing legal to recover

            const int64_t* rrow = reference.index_row(b, t);
            const int64_t* trow = test.index_row(b, t);
            ref_set.assign(rrow, rrow + nref);
            test_set.assign(trow, trow + test.valid_count(b, t));
            std::sort(ref_set.begin(), ref_set.end());
            std::sort(test_set.begin(), test_set.end());

            int64_t hits = 0;
            size_t a = 0, c = 0;
            while (a < ref_set.size() && c < test_set.size()) {
                if (ref_set[a] == test_set[c]) {
                    ++hits; ++a; ++c;
                } else if (ref_set[a] < test_set[c]) {
                    ++a;
                } else {
                    ++c;
                }
            }

            const double r = static_cast<double>(hits) / static_cast<double>(nref);
            report.per_row.push_back(r);
            sum += r;
            report.min_recall = std::min(report.min_recall, r);
            if (r == 1.0) ++perfect;
            if (r < 0.99) ++below99;
        }
    }

    report.rows_evaluated = static_cast<int64_t>(report.per_row.size());
    if (report.rows_evaluated > 0) {
        const double n = static_cast<double>(report.rows_evaluated);
        report.mean_recall = sum / n;
        report.pct_rows_perfect = 100.0 * static_cast<double>(perfect) / n;
        report.pct_rows_below_99 = 100.0 * static_cast<double>(below99) / n;
    }
    return report;
}

}  // namespace csaidx
