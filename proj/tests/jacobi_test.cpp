// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tensim/error.hpp"
#include "tensim/jacobi.hpp"

using namespace tensim;

namespace {

Domain square(std::uint32_t n) {
    Domain d;
    d.nx = d.ny = n;
    return d;
}

JacobiConfig config(std::uint32_t n, std::uint32_t iters, Variant v, std::uint32_t cores) {
    JacobiConfig c;
    c.domain = square(n);
    c.iterations = iters;
    c.variant = v;
    c.cores = cores;
    return c;
}

}  // namespace

TEST(Reference, MatchesTheDoubleOracle) {
    for (std::uint32_t n : {32u, 48u}) {
        for (std::uint32_t it : {0u, 1u, 7u, 40u}) {
            Domain d = square(n);
            EXPECT_EQ(reference_solve(d, it), oracle::jacobi(d, it)) << n << " " << it;
        }
    }
}

TEST(Reference, CustomBoundariesAndInitialGuess) {
    Domain d;
    d.nx = 40;
    d.ny = 24;
    d.initial = 0.5f;
    d.boundary.top = 0.75f;
    d.boundary.bottom = -1.0f;
    for (std::uint32_t r = 0; r < d.ny; ++r) d.boundary.left_cells.push_back(fp32_to_bf16(0.1f * static_cast<float>(r)));
    EXPECT_EQ(reference_solve(d, 25), oracle::jacobi(d, 25));
}

TEST(Reference, StencilOrderIsFixed) {
    const BF16 w = fp32_to_bf16(256.0f), e = fp32_to_bf16(1.0f), n = fp32_to_bf16(1.0f), s = fp32_to_bf16(0.0f);
    EXPECT_EQ(stencil_update(w, e, n, s).bits(), oracle::mul(oracle::bf16_round(0.25f), oracle::add(oracle::add(w.bits(), e.bits()), n.bits())));
}

TEST(Layout, PaddedRowsStartAligned) {
    DomainLayout l(LayoutKind::Padded, 64, 8);
    EXPECT_EQ(l.row_stride(), 2 * 64 + 64u);
    for (int r = 0; r < 8; ++r) EXPECT_EQ(l.offset(r, 0) % 32, 0u);
    EXPECT_EQ(l.offset(0, -1) + 2, l.offset(0, 0));
    DomainLayout u(LayoutKind::Unpadded, 64, 8);
    EXPECT_EQ(u.row_stride(), 2 * 66u);
    EXPECT_NE(u.offset(1, 0) % 32, 0u);
}

TEST(Layout, EncodeDecodeRoundTrip) {
    Domain d = square(32);
    d.initial = 0.25f;
    for (LayoutKind k : {LayoutKind::Padded, LayoutKind::Unpadded}) {
        DomainLayout l(k, d.nx, d.ny);
        auto bytes = encode_domain(d, l);
        EXPECT_EQ(bytes.size(), l.bytes());
        EXPECT_EQ(decode_grid(bytes, l), reference_solve(d, 0));
    }
}

TEST(Decompose, SplitsAndRejects) {
    Domain d = square(64);
    auto parts = decompose(d, 2, 3, 32, 1);
    ASSERT_EQ(parts.size(), 6u);
    std::uint32_t rows = 0;
    for (std::uint32_t i = 0; i < 3; ++i) rows += parts[i * 2].height;
    EXPECT_EQ(rows, 64u);
    EXPECT_EQ(parts[1].x0, 32u);
    try {
        decompose(d, 3, 1, 32, 1);
        FAIL() << "uneven X split accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndivisibleDomain);
    }
    CoreLayout l = auto_layout(square(512), 8, 32, 32);
    EXPECT_EQ(l.active(), 8u);
    EXPECT_GE(l.cores_y, l.cores_x);
}

TEST(GridFile, BinaryAndCsv) {
    Grid g(3, 2);
    g.at(1, 2) = fp32_to_bf16(1.5f);
    auto dir = std::filesystem::temp_directory_path();
    write_grid(g, 17, dir / "tensim_grid.bin");
    std::uint32_t iters = 0;
    EXPECT_EQ(read_grid(dir / "tensim_grid.bin", &iters), g);
    EXPECT_EQ(iters, 17u);
    EXPECT_EQ(std::filesystem::file_size(dir / "tensim_grid.bin"), 8 + 12 + 12u);
    write_grid_csv(g, dir / "tensim_grid.csv");
    EXPECT_GT(std::filesystem::file_size(dir / "tensim_grid.csv"), 0u);
    std::filesystem::remove(dir / "tensim_grid.bin");
    std::filesystem::remove(dir / "tensim_grid.csv");
}

class KernelEquivalence : public ::testing::TestWithParam<std::tuple<Variant, std::uint32_t, std::uint32_t>> {};

TEST_P(KernelEquivalence, BitwiseEqualToReference) {
    auto [v, cores, iters] = GetParam();
    JacobiConfig c = config(64, iters, v, cores);
    JacobiResult r = run_jacobi(c, calibrated_params());
    EXPECT_EQ(r.grid, reference_solve(c.domain, iters));
    EXPECT_TRUE(r.report.faults.empty());
    EXPECT_GT(r.seconds, 0);
}

INSTANTIATE_TEST_SUITE_P(Variants, KernelEquivalence,
                         ::testing::Combine(::testing::Values(Variant::Initial, Variant::WriteBatched, Variant::DoubleBuffered,
                                                              Variant::Optimized),
                                            ::testing::Values(1u, 4u), ::testing::Values(1u, 4u)));

TEST(Kernels, OptimizedOnWideChunks) {
    Domain d;
    d.nx = 2048 + 64;
    d.ny = 6;
    JacobiConfig c;
    c.domain = d;
    c.iterations = 3;
    c.cores = 3;
    JacobiResult r = run_jacobi(c, calibrated_params());
    EXPECT_EQ(r.grid, reference_solve(d, 3));
}

// The halo region's row 0 is the top boundary and starts aligned; every later row is
// shifted, so the first output row (region row 1) is already wrong.
TEST(Kernels, NaiveReadsCorruptFromTheSecondRegionRow) {
    JacobiConfig c = config(64, 1, Variant::Initial, 1);
    c.read_path = ReadPath::Naive;
    c.layout_kind = LayoutKind::Unpadded;
    c.write_mode = WriteMode::PermissiveCorrupting;
    JacobiResult r = run_jacobi(c, calibrated_params());
    auto diff = first_difference(r.grid, reference_solve(c.domain, 1));
    ASSERT_TRUE(diff);
    EXPECT_EQ(diff->first, 0u);
    EXPECT_FALSE(r.report.faults.empty());
}

TEST(Kernels, StrictModeRejectsUnalignedWrites) {
    JacobiConfig c = config(64, 1, Variant::Initial, 1);
    c.layout_kind = LayoutKind::Unpadded;
    try {
        run_jacobi(c, calibrated_params());
        FAIL() << "unaligned writes accepted in strict mode";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnalignedWrite);
    }
}

TEST(Kernels, ValidationErrors) {
    EXPECT_THROW(run_jacobi(config(40, 1, Variant::Optimized, 1), {}), Error);
    EXPECT_THROW(run_jacobi(config(48, 1, Variant::Initial, 1), {}), Error);
    EXPECT_THROW(run_jacobi(config(64, 1, Variant::Optimized, 109), {}), Error);
    EXPECT_THROW(estimate_jacobi(config(64, 1, Variant::Reference, 1), {}), Error);
}

TEST(Estimate, ExtrapolationMatchesFullRun) {
    JacobiConfig c = config(64, 12, Variant::DoubleBuffered, 1);
    const double full = run_jacobi(c, calibrated_params()).seconds;
    const double est = estimate_jacobi(c, calibrated_params()).seconds;
    EXPECT_NEAR(est / full, 1.0, 1e-3);
}
