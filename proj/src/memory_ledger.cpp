#include "csaidx/memory_ledger.hpp"

#include <stdexcept>
#include <utility>

namespace csaidx {

void MemoryLedger::allocate(std::string_view label, uint64_t bytes) {
    std::lock_guard<std::mutex> lock(mutex_);
    live_ += bytes;
    if (live_ > peak_) peak_ = live_;
    if (logging_) events_.push_back({std::string(label), static_cast<int64_t>(bytes)});
}

void MemoryLedger::release(std::string_view label, uint64_t bytes) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (bytes > live_) {
        throw std::logic_error("MemoryLedger: releasing more bytes than live");
    }
    live_ -= bytes;
    if (logging_) events_.push_back({std::string(label), -static_cast<int64_t>(bytes)});
}

uint64_t MemoryLedger::live_bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return live_;
}

uint64_t MemoryLedger::peak_bytes() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return peak_;
}

void MemoryLedger::set_logging(bool enabled) {
    std::lock_guard<std::mutex> lock(mutex_);
    logging_ = enabled;
}

std::vector<MemoryLedger::Event> MemoryLedger::events() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return events_;
}

void MemoryLedger::reset() {
    std::lock_guard<std::mutex> lock(mutex_);
    live_ = 0;
    peak_ = 0;
    events_.clear();
}

LedgerCharge::LedgerCharge(MemoryLedger& ledger, std::string_view label, uint64_t bytes)
    : ledger_(&ledger), label_(label), bytes_(bytes) {
    ledger_->allocate(label_, bytes_);
}

LedgerCharge::LedgerCharge(LedgerCharge&& other) noexcept
    : ledger_(other.ledger_), label_(std::move(other.label_)), bytes_(other.bytes_) {
    other.ledger_ = nullptr;
    other.bytes_ = 0;
}

LedgerCharge& LedgerCharge::operator=(LedgerCharge&& other) noexcept {
    if (this != &other) {
        release();
        ledger_ = other.ledger_;
        label_ = std::move(other.label_);
        bytes_ = other.bytes_;
        other.ledger_ = nullptr;
        other.bytes_ = 0;
    }
    return *this;
}

LedgerCharge::~LedgerCharge() { release(); }

void LedgerCharge::release() {
    if (ledger_ != nullptr) {
        ledger_->release(label_, bytes_);
        ledger_ = nullptr;
        bytes_ = 0;
    }
}

}  // namespace csaidx
