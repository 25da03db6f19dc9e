// SPDX-License-Identifier: Apache-2.0
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tensim/error.hpp"
#include "tensim/noc.hpp"

using namespace tensim;

namespace {

CostParams round_params() {
    CostParams p;
    p.read_req_ns = 100;
    p.write_req_ns = 10;
    p.read_byte_ns = 1;
    p.write_byte_ns = 2;
    p.sync_roundtrip_ns = 50;
    p.noncontig_req_ns = 10;
    p.aggregate_bw_bytes_per_s = 1e9;  // one byte per ns
    return p;
}

}  // namespace

TEST(Noc, TwoReadsFollowTheHandSchedule) {
    DramModel dram;
    DramBuffer b = dram.allocate(SingleBank{0}, 1024);
    const CostParams p = round_params();
    NocEngine noc(dram, p, 1);
    oracle::HandSchedule hand{100, 1, 50, 10, 1};

    // 64 bytes at the start: channel and bank both busy 0..164, done at 214, core free at 100.
    Picos a1 = noc.read(0, 0, get_noc_addr(dram, b, b.base_address), 0, 64);
    auto [h_accept1, h_done1] = hand.issue(0, b.base_address, 64);
    EXPECT_EQ(a1, ns_to_ps(100));
    EXPECT_EQ(h_accept1, 100);
    EXPECT_EQ(noc.read_done(0), ns_to_ps(214));
    EXPECT_EQ(h_done1, 214);

    // A contiguous follow-up queues behind the first on both servers.
    Picos a2 = noc.read(a1, 0, get_noc_addr(dram, b, b.base_address + 64), 64, 32);
    auto [h_accept2, h_done2] = hand.issue(100, b.base_address + 64, 32);
    EXPECT_EQ(a2, ns_to_ps(h_accept2));
    EXPECT_EQ(a2, ns_to_ps(264));
    EXPECT_EQ(noc.read_done(0), ns_to_ps(h_done2));
    EXPECT_EQ(noc.read_done(0), ns_to_ps(346));
}

TEST(Noc, NoncontiguousRequestPaysThePenalty) {
    DramModel dram;
    DramBuffer b = dram.allocate(SingleBank{0}, 4096);
    const CostParams p = round_params();
    NocEngine noc(dram, p, 1);
    oracle::HandSchedule hand{100, 1, 50, 10, 1};
    Picos t = noc.read(0, 0, get_noc_addr(dram, b, b.base_address), 0, 64);
    hand.issue(0, b.base_address, 64);
    noc.read(t, 0, get_noc_addr(dram, b, b.base_address + 1024), 64, 32);
    auto [acc, done] = hand.issue(100, b.base_address + 1024, 32);
    (void)acc;
    EXPECT_EQ(noc.read_done(0), ns_to_ps(done));
    EXPECT_EQ(noc.read_done(0), ns_to_ps(356));
}

TEST(Noc, SharedBankSerializesCores) {
    DramModel dram;
    DramBuffer b = dram.allocate(SingleBank{0}, 4096);
    CostParams p = round_params();
    p.read_byte_ns = 0.1;
    NocEngine noc(dram, p, 2);
    noc.read(0, 0, get_noc_addr(dram, b, b.base_address), 0, 1000);
    noc.read(0, 1, get_noc_addr(dram, b, b.base_address + 1024), 0, 1000);
    // Each core's channel takes 200 ns, but the bank holds each request for 1100 ns.
    EXPECT_EQ(noc.read_done(0), ns_to_ps(1100 + 50));
    EXPECT_EQ(noc.read_done(1), ns_to_ps(2200 + 50));
}

TEST(Noc, ReadDataIsSnapshottedAtIssueAndDeliveredAtBarrier) {
    DramModel dram;
    DramBuffer b = dram.allocate(SingleBank{0}, 64);
    std::vector<std::uint8_t> v(64, 7);
    dram.load(b, v);
    CostParams p;
    NocEngine noc(dram, p, 1);
    noc.read(0, 0, get_noc_addr(dram, b, b.base_address), 128, 64);
    std::vector<std::uint8_t> changed(64, 9);
    dram.load(b, changed);
    std::vector<std::uint8_t> sram(kSramBytes, 0);
    EXPECT_EQ(sram[128], 0);
    noc.complete_reads(0, sram);
    EXPECT_EQ(sram[128], 7);
    EXPECT_FALSE(noc.reads_pending(0));
}

TEST(Noc, WritesCommitAtBarrierAndStrictUnalignedThrowsThere) {
    DramModel dram;
    DramBuffer b = dram.allocate(SingleBank{0}, 128);
    CostParams p;
    NocEngine noc(dram, p, 1);
    std::vector<std::uint8_t> data(32, 5);
    noc.write(0, 0, data, get_noc_addr(dram, b, b.base_address + 32));
    EXPECT_EQ(dram.contents(b)[32], 0);
    noc.complete_writes(0);
    EXPECT_EQ(dram.contents(b)[32], 5);

    noc.write(0, 0, data, get_noc_addr(dram, b, b.base_address + 34));
    ASSERT_EQ(noc.faults().size(), 1u);
    EXPECT_EQ(noc.faults()[0].fault.kind, FaultKind::UnalignedWrite);
    try {
        noc.complete_writes(0);
        FAIL() << "strict unaligned write committed";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnalignedWrite);
    }
}

TEST(Noc, UnknownCoordinateRejected) {
    DramModel dram;
    dram.allocate(SingleBank{0}, 64);
    CostParams p;
    NocEngine noc(dram, p, 1);
    try {
        noc.read(0, 0, get_noc_addr(1, 1, 0), 0, 32);
        FAIL() << "read from a Tensix coordinate accepted";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnknownCoordinate);
    }
}
