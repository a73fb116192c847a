#include <gtest/gtest.h>

#include "lowrank/oracle.hpp"
#include "lowrank/rng.hpp"

using namespace lowrank;

namespace {

Matrix counting_matrix(Index d, Index n) {
    Matrix M(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < d; ++i) M(i, j) = static_cast<double>(j * d + i);
    return M;
}

} // namespace

TEST(EntryOracle, RepeatQueryCountsRawNotUnique) {
    EntryOracle oracle(counting_matrix(4, 3));
    EXPECT_DOUBLE_EQ(oracle.query(1, 2), 9.0);
    EXPECT_DOUBLE_EQ(oracle.query(1, 2), 9.0);
    const OracleLedger ledger = oracle.snapshot_ledger();
    EXPECT_EQ(ledger.raw_queries, 2u);
    EXPECT_EQ(ledger.unique_entries, 1u);
    EXPECT_EQ(ledger.per_column_unique[2], 1u);
}

TEST(EntryOracle, FullScanSaturatesUnique) {
    const Index d = 5, n = 4;
    EntryOracle oracle(counting_matrix(d, n));
    for (int rep = 0; rep < 2; ++rep)
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < d; ++i) oracle.query(i, j);
    const OracleLedger ledger = oracle.snapshot_ledger();
    EXPECT_EQ(ledger.unique_entries, static_cast<uint64_t>(d * n));
    EXPECT_EQ(ledger.raw_queries, static_cast<uint64_t>(2 * d * n));
}

TEST(EntryOracle, OutOfRangeThrows) {
    EntryOracle oracle(counting_matrix(3, 3));
    EXPECT_THROW(oracle.query(-1, 0), std::invalid_argument);
    EXPECT_THROW(oracle.query(0, 3), std::invalid_argument);
    EXPECT_THROW(oracle.query(3, 0), std::invalid_argument);
}

TEST(EntryOracle, BudgetCapEnforced) {
    EntryOracle oracle(counting_matrix(3, 3), uint64_t{4});
    for (int q = 0; q < 4; ++q) oracle.query(0, 0);
    EXPECT_THROW(oracle.query(1, 1), BudgetExceededError);
    EXPECT_EQ(oracle.snapshot_ledger().raw_queries, 4u);
}

TEST(EntryOracle, ColumnQueryTracksFreshEntries) {
    const Index d = 6;
    EntryOracle oracle(counting_matrix(d, 2));
    const Vector col = oracle.query_column(1);
    EXPECT_DOUBLE_EQ(col(3), 9.0);
    EXPECT_EQ(oracle.snapshot_ledger().unique_entries, static_cast<uint64_t>(d));

    oracle.query_column(1); // all repeats
    EXPECT_EQ(oracle.snapshot_ledger().unique_entries, static_cast<uint64_t>(d));
    EXPECT_EQ(oracle.snapshot_ledger().raw_queries, static_cast<uint64_t>(2 * d));
}

TEST(EntryOracle, ColumnQueryAfterProbesAddsComplement) {
    const Index d = 10;
    EntryOracle oracle(counting_matrix(d, 1));
    // Probe three distinct rows plus a duplicate.
    oracle.query(2, 0);
    oracle.query(5, 0);
    oracle.query(7, 0);
    oracle.query(5, 0);
    const uint64_t before = oracle.snapshot_ledger().unique_entries;
    EXPECT_EQ(before, 3u);
    oracle.query_column(0);
    const OracleLedger ledger = oracle.snapshot_ledger();
    EXPECT_EQ(ledger.unique_entries, static_cast<uint64_t>(d));
    EXPECT_EQ(ledger.unique_entries - before, static_cast<uint64_t>(d) - 3u);
}

TEST(EntryOracle, SnapshotsAreStableAcrossNoOps) {
    EntryOracle oracle(counting_matrix(3, 3));
    const OracleLedger fresh = oracle.snapshot_ledger();
    EXPECT_EQ(fresh.raw_queries, 0u);
    EXPECT_EQ(fresh.unique_entries, 0u);
    oracle.query(0, 0);
    const OracleLedger a = oracle.snapshot_ledger();
    const OracleLedger b = oracle.snapshot_ledger();
    EXPECT_EQ(a.raw_queries, b.raw_queries);
    EXPECT_EQ(a.unique_entries, b.unique_entries);
    EXPECT_EQ(a.per_column_unique, b.per_column_unique);
}

TEST(EntryOracle, PerColumnUniquesSumToGlobal) {
    Rng rng(55);
    const Index d = 12, n = 9;
    EntryOracle oracle(counting_matrix(d, n));
    for (int q = 0; q < 400; ++q) {
        const Index i = static_cast<Index>(uniform_below(rng, d));
        const Index j = static_cast<Index>(uniform_below(rng, n));
        oracle.query(i, j);
    }
    const OracleLedger ledger = oracle.snapshot_ledger();
    uint64_t sum = 0;
    for (uint64_t c : ledger.per_column_unique) sum += c;
    EXPECT_EQ(sum, ledger.unique_entries);
    EXPECT_LE(ledger.unique_entries, ledger.raw_queries);
}

TEST(EntryOracle, AccessLogRecordsOrder) {
    EntryOracle oracle(counting_matrix(4, 4));
    oracle.query(1, 0);
    oracle.query(2, 0);
    oracle.query(0, 3);
    const auto log = oracle.access_log();
    ASSERT_EQ(log.size(), 3u);
    EXPECT_EQ(log[0].row, 1);
    EXPECT_EQ(log[0].col, 0);
    EXPECT_EQ(log[2].col, 3);
    EXPECT_FALSE(oracle.access_log_is_reservoir());
}

TEST(EntryOracle, LoggingCanBeDisabled) {
    EntryOracle oracle(counting_matrix(4, 4), std::nullopt, false);
    oracle.query(1, 1);
    EXPECT_TRUE(oracle.access_log().empty());
}
