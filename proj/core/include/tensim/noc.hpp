// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensim/cost.hpp"
#include "tensim/dram.hpp"
#include "tensim/grid.hpp"
#include "tensim/sim.hpp"

namespace tensim {

struct NocAddress {
    std::uint32_t noc_x = 0;
    std::uint32_t noc_y = 0;
    std::uint64_t local_address = 0;

    friend bool operator==(const NocAddress&, const NocAddress&) = default;
};

NocAddress get_noc_addr(std::uint32_t noc_x, std::uint32_t noc_y, std::uint64_t offset);
// Address of a logical buffer byte: the bank holding its page.
NocAddress get_noc_addr(const DramModel& dram, const DramBuffer& buf, std::uint64_t address);

struct FaultRecord {
    Picos time;
    int core;
    AccessFault fault;
};

std::string faults_csv(const std::vector<FaultRecord>& faults);

struct TrafficCounters {
    std::uint64_t reads = 0;
    std::uint64_t writes = 0;
    std::uint64_t read_bytes = 0;
    std::uint64_t write_bytes = 0;
};

// Reads travel on NoC 0 and writes on NoC 1. Each (core, NoC) channel and each DRAM bank
// is a FIFO server; a request occupies both and completes when the later one finishes,
// plus the barrier round trip. Submission happens in global time order, so completion
// times are known at issue.
class NocEngine {
public:
    NocEngine(DramModel& dram, const CostParams& params, int cores);

    // Both return the time the issuing core may continue (request accepted by the NoC).
    Picos read(Picos now, int core, const NocAddress& src, std::uint32_t sram_dst, std::uint32_t length);
    Picos write(Picos now, int core, std::span<const std::uint8_t> data, const NocAddress& dst);

    Picos read_done(int core) const;
    Picos write_done(int core) const;
    bool reads_pending(int core) const { return !reads_[core].empty(); }
    bool writes_pending(int core) const { return !writes_[core].empty(); }
    // Makes pending data visible; called when the barrier returns.
    void complete_reads(int core, std::span<std::uint8_t> sram);
    void complete_writes(int core);

    const std::vector<FaultRecord>& faults() const { return faults_; }
    const TrafficCounters& counters(int core) const { return counters_[core]; }

private:
    struct Channel {
        Picos free = 0;
        std::uint32_t last_bank = ~0u;
        std::uint64_t last_end = 0;
    };
    struct PendingRead {
        Picos done;
        std::uint32_t sram_dst;
        std::vector<std::uint8_t> bytes;
    };
    struct PendingWrite {
        Picos done;
        std::uint32_t bank;
        std::uint64_t address;
        std::vector<std::uint8_t> bytes;
        bool strict_violation;
    };

    Picos schedule(Picos now, int core, TxKind kind, std::uint32_t bank, std::uint64_t address, std::uint64_t length,
                   Picos& done);
    std::uint32_t bank_of(const NocAddress& a) const;

    DramModel& dram_;
    const CostParams& params_;
    std::vector<Channel> read_ch_;
    std::vector<Channel> write_ch_;
    std::vector<Picos> bank_free_;
    std::vector<std::vector<PendingRead>> reads_;
    std::vector<std::vector<PendingWrite>> writes_;
    std::vector<Picos> read_done_;
    std::vector<Picos> write_done_;
    std::vector<FaultRecord> faults_;
    std::vector<TrafficCounters> counters_;
};

}  // namespace tensim
