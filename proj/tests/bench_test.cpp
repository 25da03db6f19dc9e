// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include <gtest/gtest.h>

#include "tensim/bench.hpp"
#include "tensim/error.hpp"

using namespace tensim;

namespace {

StreamConfig small() {
    StreamConfig c;
    c.width = 256;
    c.height = 16;
    c.batch_size = 256;
    return c;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

}  // namespace

TEST(Stream, DataPassesThroughUnchanged) {
    for (AccessOrder o : {AccessOrder::Contiguous, AccessOrder::ColumnMajor}) {
        for (SyncMode s : {SyncMode::PerRow, SyncMode::PerAccess}) {
            StreamConfig c = small();
            c.batch_size = 128;
            c.access_order = o;
            c.sync_mode = s;
            StreamResult r = run_stream(c, calibrated_params());
            EXPECT_TRUE(r.pass_through) << to_string(o) << " " << to_string(s);
            EXPECT_EQ(r.faults, 0u);
            EXPECT_GT(r.seconds, 0);
        }
    }
}

TEST(Stream, RoutesReplicationAndInterleaving) {
    StreamConfig c = small();
    c.route = Route::ViaLocalBufferMemcpy;
    EXPECT_TRUE(run_stream(c, calibrated_params()).pass_through);
    c = small();
    c.replication = 3;
    c.page_size = 1024;
    c.cores = 2;
    EXPECT_TRUE(run_stream(c, calibrated_params()).pass_through);
}

TEST(Stream, TinyBatchesAreCountedAsFaults) {
    StreamConfig c = small();
    c.batch_size = 16;
    c.varied = StreamSide::Write;
    StreamResult r = run_stream(c, calibrated_params());
    EXPECT_GT(r.faults, 0u);
}

TEST(Stream, EstimateTracksFullRun) {
    StreamConfig c = small();
    c.height = 64;
    c.batch_size = 512;
    const double full = run_stream(c, calibrated_params()).seconds;
    EXPECT_NEAR(estimate_stream(c, calibrated_params()).seconds / full, 1.0, 0.02);
}

TEST(Stream, RejectsBadConfigs) {
    StreamConfig c = small();
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), Error);
    c = small();
    c.page_size = 1000;
    EXPECT_THROW(run_stream(c, {}), Error);
    EXPECT_THROW(parse_sync_mode("sometimes"), Error);
}

TEST(Sweep, CartesianProductAndCsv) {
    SweepGrid g;
    g.base = small();
    g.batch_sizes = {64, 256, 1024};
    g.sync_modes = {SyncMode::PerRow, SyncMode::PerAccess};
    auto rows = sweep(g, calibrated_params());
    ASSERT_EQ(rows.size(), 6u);
    std::string csv = sweep_csv(rows);
    EXPECT_EQ(count_lines(csv), 7u);
    EXPECT_EQ(csv.rfind("width,height,element_size,varied,batch_size", 0), 0u);
}

TEST(Presets, BatchTablesHaveEveryMeasuredCell) {
    auto names = preset_names();
    EXPECT_EQ(names.size(), 9u);
    PresetTable t = run_preset("batch-contiguous", calibrated_params());
    EXPECT_EQ(t.rows.size(), 52u);
    for (const auto& r : t.rows) {
        ASSERT_EQ(r.size(), t.columns.size());
        EXPECT_FALSE(r.back().empty());
    }
    EXPECT_THROW(run_preset("nope", {}), Error);
}

TEST(Presets, ReplicationRowsAreOrdered) {
    PresetTable t = run_preset("replication", calibrated_params());
    ASSERT_EQ(t.rows.size(), 6u);
    std::size_t col = 0;
    while (t.columns[col] != "runtime_s") ++col;
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(std::stod(t.rows[i][col]), std::stod(t.rows[i - 1][col]));
}
