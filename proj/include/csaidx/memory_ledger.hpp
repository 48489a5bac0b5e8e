#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace csaidx {

// Allocation accounting for transient working buffers. Inputs and final
// outputs are never charged; the point is to audit what the algorithm itself
// keeps live. Thread safe so parallel query-tile workers can share one ledger
// (the peak then depends on scheduling; single-threaded runs are the ones
// with a guaranteed bound).
class MemoryLedger {
public:
    struct Event {
        std::string label;
        int64_t delta_bytes;  // positive on allocate, negative on release
    };

    void allocate(std::string_view label, uint64_t bytes);
    void release(std::string_view label, uint64_t bytes);

    [[nodiscard]] uint64_t live_bytes() const;
    [[nodiscard]] uint64_t peak_bytes() const;

    // Event recording is off by default; tests that audit individual charges
    // turn it on.
    void set_logging(bool enabled);
    [[nodiscard]] std::vector<Event> events() const;

    void reset();

private:
    mutable std::mutex mutex_;
    uint64_t live_ = 0;
    uint64_t peak_ = 0;
    bool logging_ = false;
    std::vector<Event> events_;
};

// RAII charge; releases the same byte count on destruction.
class LedgerCharge {
public:
    LedgerCharge() = default;
    LedgerCharge(MemoryLedger& ledger, std::string_view label, uint64_t bytes);
    LedgerCharge(LedgerCharge&& other) noexcept;
    LedgerCharge& operator=(LedgerCharge&& other) noexcept;
    LedgerCharge(const LedgerCharge&) = delete;
    LedgerCharge& operator=(const LedgerCharge&) = delete;
    ~LedgerCharge();

    void release();
    [[nodiscard]] uint64_t bytes() const { return bytes_; }

private:
    MemoryLedger* ledger_ = nullptr;
    std::string label_;
    uint64_t bytes_ = 0;
};

}  // namespace csaidx
