#pragma once

#include <atomic>
#include <mutex>
#include <optional>
#include <vector>

#include "lowrank/errors.hpp"
#include "lowrank/types.hpp"

namespace lowrank {

struct OracleLedger {
    uint64_t raw_queries = 0;
    uint64_t unique_entries = 0;
    std::vector<uint64_t> per_column_unique;
    std::optional<uint64_t> budget_cap;
    Index rows = 0;
    Index cols = 0;
};

struct AccessRecord {
    Index row = 0;
    Index col = 0;
};

/// Sole gateway to ground-truth entries. Every read goes through query() /
/// query_column(), which charge the budget and keep exact raw / unique
/// counts. Counters are atomic so parallel column passes can share an
/// oracle; they never decrease.
class EntryOracle {
public:
    /// Full per-query access log kept up to this many raw queries, after
    /// which a fixed-size reservoir sample is maintained instead.
    static constexpr uint64_t kLogCutover = 1'000'000;
    static constexpr size_t kReservoirSize = 4096;

    explicit EntryOracle(Matrix hidden, std::optional<uint64_t> budget_cap = std::nullopt,
                         bool log_access = true)
        : hidden_(std::move(hidden)),
          budget_cap_(budget_cap),
          log_enabled_(log_access),
          seen_(static_cast<size_t>(hidden_.size())),
          per_column_unique_(static_cast<size_t>(hidden_.cols())) {
        if (hidden_.rows() < 1 || hidden_.cols() < 1)
            throw std::invalid_argument("EntryOracle: matrix must be nonempty");
    }

    EntryOracle(const EntryOracle&) = delete;
    EntryOracle& operator=(const EntryOracle&) = delete;

    Index rows() const { return hidden_.rows(); }
    Index cols() const { return hidden_.cols(); }

    double query(Index row, Index col) {
        if (row < 0 || row >= rows() || col < 0 || col >= cols())
            throw std::invalid_argument("EntryOracle::query: index out of range");
        charge();
        const size_t flat = static_cast<size_t>(col) * static_cast<size_t>(rows()) +
                            static_cast<size_t>(row);
        if (seen_[flat].exchange(1, std::memory_order_relaxed) == 0) {
            unique_.fetch_add(1, std::memory_order_relaxed);
            per_column_unique_[static_cast<size_t>(col)].fetch_add(1, std::memory_order_relaxed);
        }
        if (log_enabled_) record_access(row, col);
        return hidden_(row, col);
    }

    Vector query_column(Index col) {
        Vector out(rows());
        for (Index i = 0; i < rows(); ++i) out(i) = query(i, col);
        return out;
    }

    OracleLedger snapshot_ledger() const {
        OracleLedger ledger;
        ledger.raw_queries = raw_.load(std::memory_order_relaxed);
        ledger.unique_entries = unique_.load(std::memory_order_relaxed);
        ledger.per_column_unique.reserve(per_column_unique_.size());
        for (const auto& c : per_column_unique_)
            ledger.per_column_unique.push_back(c.load(std::memory_order_relaxed));
        ledger.budget_cap = budget_cap_;
        ledger.rows = rows();
        ledger.cols = cols();
        return ledger;
    }

    void set_access_logging(bool enabled) { log_enabled_ = enabled; }
    bool access_log_is_reservoir() const { return reservoir_mode_; }

    std::vector<AccessRecord> access_log() const {
        std::lock_guard<std::mutex> lock(log_mutex_);
        return log_;
    }

private:
    void charge() {
        if (budget_cap_ && raw_.load(std::memory_order_relaxed) >= *budget_cap_)
            throw BudgetExceededError("EntryOracle: query budget exceeded");
        raw_.fetch_add(1, std::memory_order_relaxed);
    }

    void record_access(Index row, Index col) {
        std::lock_guard<std::mutex> lock(log_mutex_);
        ++logged_;
        if (!reservoir_mode_ && logged_ > kLogCutover) {
            reservoir_mode_ = true;
            if (log_.size() > kReservoirSize) log_.resize(kReservoirSize);
        }
        if (!reservoir_mode_) {
            log_.push_back({row, col});
            return;
        }
        if (log_.size() < kReservoirSize) {
            log_.push_back({row, col});
            return;
        }
        reservoir_state_ = reservoir_state_ * 6364136223846793005ull + 1442695040888963407ull;
        const uint64_t slot = (reservoir_state_ >> 33) % logged_;
        if (slot < kReservoirSize) log_[static_cast<size_t>(slot)] = {row, col};
    }

    Matrix hidden_;
    std::optional<uint64_t> budget_cap_;
    std::atomic<bool> log_enabled_;
    std::atomic<uint64_t> raw_{0};
    std::atomic<uint64_t> unique_{0};
    std::vector<std::atomic<uint8_t>> seen_;
    std::vector<std::atomic<uint64_t>> per_column_unique_;

    mutable std::mutex log_mutex_;
    std::vector<AccessRecord> log_;
    uint64_t logged_ = 0;
    bool reservoir_mode_ = false;
    uint64_t reservoir_state_ = 0x9E3779B97F4A7C15ull;
};

} // namespace lowrank
