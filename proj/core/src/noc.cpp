// SPDX-License-Identifier: Apache-2.0
#include "tensim/noc.hpp"

#include <algorithm>
#include <cstring>
#include <fmt/format.h>

#include "tensim/error.hpp"

namespace tensim {

NocAddress get_noc_addr(std::uint32_t noc_x, std::uint32_t noc_y, std::uint64_t offset) {
    CoreCoord c{noc_x, noc_y};
    if (!CoreGrid::bank_at(c) && !CoreGrid::is_tensix(c)) {
        throw Error(ErrorKind::UnknownCoordinate, fmt::format("({}, {}) is neither a DRAM bank nor a core", noc_x, noc_y));
    }
    return NocAddress{noc_x, noc_y, offset};
}

NocAddress get_noc_addr(const DramModel& dram, const DramBuffer& buf, std::uint64_t address) {
    auto segs = dram.segments(buf, address, 1);
    CoreCoord c = CoreGrid::dram_banks().at(segs.front().bank);
    return NocAddress{c.x, c.y, segs.front().bank_address};
}

std::string faults_csv(const std::vector<FaultRecord>& faults) {
    std::string out = "virtual_time_ns,core,kind,requested_address,effective_address\n";
    for (const FaultRecord& f : faults) {
        out += fmt::format("{},{},{},{},{}\n", ps_to_ns(f.time), f.core,
                           f.fault.kind == FaultKind::UnalignedRead ? "UnalignedRead" : "UnalignedWrite",
                           f.fault.requested_address, f.fault.effective_address);
    }
    return out;
}

NocEngine::NocEngine(DramModel& dram, const CostParams& params, int cores)
    : dram_(dram),
      params_(params),
      read_ch_(cores),
      write_ch_(cores),
      bank_free_(dram.config().bank_count, 0),
      reads_(cores),
      writes_(cores),
      read_done_(cores, 0),
      write_done_(cores, 0),
      counters_(cores) {}

std::uint32_t NocEngine::bank_of(const NocAddress& a) const {
    auto bank = CoreGrid::bank_at({a.noc_x, a.noc_y});
    if (!bank) {
        if (CoreGrid::is_tensix({a.noc_x, a.noc_y})) {
            throw Error(ErrorKind::UnknownCoordinate, "core-to-core transfers are not modeled");
        }
        throw Error(ErrorKind::UnknownCoordinate, fmt::format("({}, {})", a.noc_x, a.noc_y));
    }
    if (*bank >= dram_.config().bank_count) throw Error(ErrorKind::UnknownCoordinate, "bank not present");
    return *bank;
}

Picos NocEngine::schedule(Picos now, int core, TxKind kind, std::uint32_t bank, std::uint64_t address,
                          std::uint64_t length, Picos& done) {
    Channel& ch = kind == TxKind::Read ? read_ch_[core] : write_ch_[core];
    double factor = 1.0;
    if (auto r = dram_.resolve(bank, address)) factor = params_.interleave(dram_.buffer(r->buffer_id).page_size());

    bool contiguous = ch.last_bank == ~0u || (ch.last_bank == bank && ch.last_end == address);
    double ch_ns = params_.req_ns(kind) + static_cast<double>(length) * params_.byte_ns(kind) / factor +
                   (contiguous ? 0.0 : params_.noncontig_req_ns);
    double bank_ns = params_.req_ns(kind) + static_cast<double>(length) / params_.aggregate_bw_bytes_per_s * 1e9;

    Picos ch_start = std::max(now, ch.free);
    Picos ch_end = ch_start + ns_to_ps(ch_ns);
    ch.free = ch_end;
    ch.last_bank = bank;
    ch.last_end = address + length;

    Picos bank_start = std::max(now, bank_free_[bank]);
    Picos bank_end = bank_start + ns_to_ps(bank_ns);
    bank_free_[bank] = bank_end;

    done = std::max(ch_end, bank_end) + ns_to_ps(params_.sync_roundtrip_ns);
    return ch_start + ns_to_ps(params_.req_ns(kind));
}

Picos NocEngine::read(Picos now, int core, const NocAddress& src, std::uint32_t sram_dst, std::uint32_t length) {
    if (length == 0) throw Error(ErrorKind::InvalidConfig, "zero-length NoC read");
    if (static_cast<std::uint64_t>(sram_dst) + length > kSramBytes) {
        throw Error(ErrorKind::OutOfBoundsSRAM, fmt::format("read into SRAM [{}, +{})", sram_dst, length));
    }
    std::uint32_t bank = bank_of(src);
    std::uint64_t align = dram_.config().alignment;
    std::uint64_t eff = src.local_address & ~(align - 1);
    PendingRead pr;
    pr.bytes = dram_.read_bank(bank, eff, length);
    if (eff != src.local_address) {
        faults_.push_back({now, core, AccessFault{FaultKind::UnalignedRead, src.local_address, eff}});
    }
    pr.sram_dst = sram_dst;
    Picos accept = schedule(now, core, TxKind::Read, bank, src.local_address, length, pr.done);
    read_done_[core] = std::max(read_done_[core], pr.done);
    reads_[core].push_back(std::move(pr));
    counters_[core].reads += 1;
    counters_[core].read_bytes += length;
    return accept;
}

Picos NocEngine::write(Picos now, int core, std::span<const std::uint8_t> data, const NocAddress& dst) {
    if (data.empty()) throw Error(ErrorKind::InvalidConfig, "zero-length NoC write");
    std::uint32_t bank = bank_of(dst);
    std::uint64_t align = dram_.config().alignment;
    std::uint64_t eff = dst.local_address & ~(align - 1);
    if (!dram_.resolve(bank, dst.local_address) || !dram_.resolve(bank, dst.local_address + data.size() - 1)) {
        throw Error(ErrorKind::OutOfBounds, fmt::format("write to bank {} address {}", bank, dst.local_address));
    }
    PendingWrite pw;
    pw.bank = bank;
    pw.address = eff;
    pw.bytes.assign(data.begin(), data.end());
    pw.strict_violation = false;
    if (eff != dst.local_address) {
        faults_.push_back({now, core, AccessFault{FaultKind::UnalignedWrite, dst.local_address, eff}});
        pw.strict_violation = dram_.config().write_mode == WriteMode::Strict;
    }
    Picos accept = schedule(now, core, TxKind::Write, bank, dst.local_address, data.size(), pw.done);
    write_done_[core] = std::max(write_done_[core], pw.done);
    writes_[core].push_back(std::move(pw));
    counters_[core].writes += 1;
    counters_[core].write_bytes += data.size();
    return accept;
}

Picos NocEngine::read_done(int core) const { return reads_[core].empty() ? 0 : read_done_[core]; }
Picos NocEngine::write_done(int core) const { return writes_[core].empty() ? 0 : write_done_[core]; }

void NocEngine::complete_reads(int core, std::span<std::uint8_t> sram) {
    for (PendingRead& pr : reads_[core]) std::memcpy(sram.data() + pr.sram_dst, pr.bytes.data(), pr.bytes.size());
    reads_[core].clear();
}

void NocEngine::complete_writes(int core) {
    auto pending = std::move(writes_[core]);
    writes_[core].clear();
    for (PendingWrite& pw : pending) {
        if (pw.strict_violation) {
            throw Error(ErrorKind::UnalignedWrite, fmt::format("unaligned write to bank {} surfaced at barrier", pw.bank));
        }
        dram_.write_bank(pw.bank, pw.address, pw.bytes);
    }
}

}  // namespace tensim
