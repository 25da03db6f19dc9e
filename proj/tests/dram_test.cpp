// SPDX-License-Identifier: Apache-2.0
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tensim/dram.hpp"
#include "tensim/error.hpp"

using namespace tensim;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorKind::Io;
}

std::vector<std::uint8_t> iota_bytes(std::size_t n, int start = 0) {
    std::vector<std::uint8_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<std::uint8_t>(start + i);
    return v;
}

}  // namespace

TEST(Dram, AllocationsAreAlignedAndDisjoint) {
    DramModel d;
    DramBuffer a = d.allocate(SingleBank{0}, 100);
    DramBuffer b = d.allocate(SingleBank{0}, 64);
    EXPECT_EQ(a.base_address % 32, 0u);
    EXPECT_EQ(b.base_address % 32, 0u);
    EXPECT_GE(b.base_address, a.base_address + a.length);
    EXPECT_EQ(a.page_size(), 0u);
}

TEST(Dram, RejectsBadRequests) {
    DramModel d;
    EXPECT_EQ(kind_of([&] { d.allocate(SingleBank{0}, 0); }), ErrorKind::OutOfMemory);
    EXPECT_EQ(kind_of([&] { d.allocate(SingleBank{8}, 64); }), ErrorKind::OutOfMemory);
    EXPECT_EQ(kind_of([&] { d.allocate(Interleaved{48}, 64); }), ErrorKind::InvalidPageSize);
    EXPECT_EQ(kind_of([&] { d.allocate(Interleaved{kMaxPageSize * 2}, 64); }), ErrorKind::InvalidPageSize);
    DramBuffer b = d.allocate(SingleBank{1}, 64);
    EXPECT_EQ(kind_of([&] { d.raw_read(b, b.base_address + 60, 8); }), ErrorKind::OutOfBounds);
}

TEST(Dram, UnalignedReadReturnsBytesFromTheAlignedAddress) {
    DramModel d;
    DramBuffer b = d.allocate(SingleBank{0}, 128);
    d.load(b, iota_bytes(128));
    ReadResult r = d.raw_read(b, b.base_address + 40, 8);
    ASSERT_TRUE(r.fault);
    EXPECT_EQ(r.fault->kind, FaultKind::UnalignedRead);
    EXPECT_EQ(r.fault->effective_address, b.base_address + 32);
    EXPECT_EQ(r.bytes, iota_bytes(8, 32));
}

TEST(Dram, UnalignedWriteStrictThrowsPermissiveCorrupts) {
    DramModel strict;
    DramBuffer s = strict.allocate(SingleBank{0}, 128);
    EXPECT_EQ(kind_of([&] { strict.raw_write(s, s.base_address + 2, iota_bytes(4)); }), ErrorKind::UnalignedWrite);

    DramModel loose({8, 1ull << 30, 32, WriteMode::PermissiveCorrupting});
    DramBuffer b = loose.allocate(SingleBank{0}, 128);
    oracle::ByteMemory mem(b.base_address, 128);
    auto f = loose.raw_write(b, b.base_address + 66, iota_bytes(4, 9));
    mem.write(b.base_address + 66, iota_bytes(4, 9));
    ASSERT_TRUE(f);
    EXPECT_EQ(f->effective_address, b.base_address + 64);
    auto all = loose.contents(b);
    EXPECT_TRUE(std::equal(all.begin(), all.end(), mem.bytes().begin()));
    EXPECT_EQ(all[64], 9);
    EXPECT_EQ(all[66], 11);
}

TEST(Dram, InterleavedPagesRotateOverBanks) {
    DramModel d;
    DramBuffer b = d.allocate(Interleaved{1024}, 1024 * 20);
    auto segs = d.segments(b, b.base_address, b.length);
    ASSERT_EQ(segs.size(), 20u);
    for (std::size_t i = 0; i < segs.size(); ++i) {
        EXPECT_EQ(segs[i].bank, i % 8);
        EXPECT_EQ(segs[i].length, 1024u);
        EXPECT_EQ(segs[i].logical_address, b.base_address + i * 1024);
        auto r = d.resolve(segs[i].bank, segs[i].bank_address + 17);
        ASSERT_TRUE(r);
        EXPECT_EQ(r->buffer_id, b.id);
        EXPECT_EQ(r->logical_address, b.base_address + i * 1024 + 17);
    }
    // A range that straddles a page boundary splits there.
    auto mid = d.segments(b, b.base_address + 1000, 100);
    ASSERT_EQ(mid.size(), 2u);
    EXPECT_EQ(mid[0].length, 24u);
    EXPECT_EQ(mid[1].length, 76u);
    EXPECT_NE(mid[0].bank, mid[1].bank);
}

TEST(Dram, BankLevelAccessSeesLogicalWrites) {
    DramModel d;
    DramBuffer b = d.allocate(Interleaved{64}, 64 * 9);
    d.raw_write(b, b.base_address + 64 * 8, iota_bytes(64, 100));
    auto seg = d.segments(b, b.base_address + 64 * 8, 64).front();
    EXPECT_EQ(seg.bank, 0u);
    EXPECT_EQ(d.read_bank(seg.bank, seg.bank_address, 64), iota_bytes(64, 100));
}

TEST(Dram, RawFileRoundTrip) {
    DramModel d;
    DramBuffer b = d.allocate(SingleBank{2}, 96);
    d.load(b, iota_bytes(96, 3));
    auto path = std::filesystem::temp_directory_path() / "tensim_dram_raw.bin";
    d.export_raw(b, path);
    DramModel e;
    DramBuffer c = e.allocate(SingleBank{2}, 96);
    e.import_raw(c, path);
    auto x = e.contents(c);
    EXPECT_EQ(std::vector<std::uint8_t>(x.begin(), x.end()), iota_bytes(96, 3));
    std::filesystem::remove(path);
}
