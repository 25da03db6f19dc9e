// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "tensim/calibrate.hpp"
#include "tensim/cost.hpp"
#include "tensim/datasets.hpp"
#include "tensim/error.hpp"

using namespace tensim;

TEST(CostParams, FormatParseRoundTrip) {
    CostParams p;
    p.read_req_ns = 123.456789;
    p.interleave_factor[1024] = 0.3;
    p.interleave_factor[16384] = 2.0;
    EXPECT_EQ(parse_params(format_params(p, "header")), p);
}

TEST(CostParams, RejectsUnknownAndInvalid) {
    EXPECT_THROW(parse_params("nonsense = 3\n"), Error);
    EXPECT_THROW(parse_params("read_req_ns = -1\n"), Error);
    EXPECT_THROW(parse_params("read_req_ns = abc\n"), Error);
}

TEST(CostParams, InterleaveIsLogLinearBetweenFittedPages) {
    CostParams p;
    EXPECT_DOUBLE_EQ(p.interleave(4096), 1.0);
    p.interleave_factor[1024] = 1.0;
    p.interleave_factor[4096] = 4.0;
    EXPECT_DOUBLE_EQ(p.interleave(0), 1.0);
    EXPECT_NEAR(p.interleave(2048), 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(p.interleave(512), 1.0);
    EXPECT_DOUBLE_EQ(p.interleave(65536), 4.0);
}

TEST(CostParams, PredictTransactionFormula) {
    CostParams p;
    const double expect = p.read_req_ns + 256 * p.read_byte_ns + p.sync_roundtrip_ns + p.noncontig_req_ns;
    EXPECT_DOUBLE_EQ(predict_transaction(p, TxKind::Read, 256, false, true), expect);
    EXPECT_DOUBLE_EQ(predict_transaction(p, TxKind::Write, 64, true, false), p.write_req_ns + 64 * p.write_byte_ns);
}

TEST(CostParams, EnergyAndRate) {
    CostParams p;
    EXPECT_DOUBLE_EQ(energy(p, 2.0), 104.0);
    EXPECT_DOUBLE_EQ(gpt_per_s(1e9, 3, 1.5), 2.0);
}

TEST(CostParams, CalibratedFileIsEmbedded) {
    const CostParams& c = calibrated_params();
    EXPECT_NO_THROW(c.validate());
    EXPECT_FALSE(c.interleave_factor.empty());
    EXPECT_DOUBLE_EQ(c.power_watts, 52.0);
}

TEST(Datasets, ShapesMatchThePublishedTables) {
    EXPECT_EQ(datasets::versions().size(), 4u);
    EXPECT_EQ(datasets::ablation().size(), 6u);
    EXPECT_EQ(datasets::batch_contiguous().size(), 13u);
    EXPECT_EQ(datasets::batch_noncontiguous().size(), 13u);
    EXPECT_EQ(datasets::replication().size(), 6u);
    EXPECT_EQ(datasets::page_size().size(), 8u);
    EXPECT_EQ(datasets::core_scaling().size(), 7u);
    EXPECT_EQ(datasets::batch_contiguous().front().batch_bytes, 16384u);
    EXPECT_DOUBLE_EQ(datasets::batch_contiguous().back().read_nosync_s, 1.761);
    EXPECT_DOUBLE_EQ(datasets::ablation().front().gpt_s, 7.574);
}

// The closed forms used inside the fit track the simulator on rows where they apply.
TEST(Surrogate, TracksTheSimulator) {
    const CostParams& p = calibrated_params();
    for (std::uint32_t b : {16384u, 1024u, 64u}) {
        for (SyncMode s : {SyncMode::PerRow, SyncMode::PerAccess}) {
            StreamConfig c;
            c.batch_size = b;
            c.sync_mode = s;
            const double ratio = surrogate_stream_seconds(c, p) / estimate_stream(c, p).seconds;
            EXPECT_NEAR(ratio, 1.0, 0.1) << b << " " << to_string(s);
        }
    }
    AblationToggles write_only{false, false, false, true};
    JacobiConfig j;
    j.domain.nx = j.domain.ny = 512;
    j.iterations = 10000;
    j.variant = Variant::DoubleBuffered;
    EXPECT_NEAR(surrogate_ablation_gpt_s(write_only, p) / run_ablation(j, write_only, p), 1.0, 0.1);
}

TEST(Calibrate, ImprovesTheFitAndReportsConstraints) {
    CalibrationOptions o;
    o.fit_interleave = false;
    o.simulate_residuals = false;
    CalibrationReport r = calibrate(o);
    EXPECT_LE(r.final_cost, r.initial_cost);
    EXPECT_FALSE(r.surrogate_residuals.empty());
    EXPECT_EQ(r.constraints.size(), 11u);
    for (const auto& c : r.constraints) EXPECT_GT(c.value, 0) << c.parameter;
    EXPECT_NE(r.residuals_csv().find("surrogate,"), std::string::npos);
    EXPECT_NO_THROW(r.params.validate());
}
