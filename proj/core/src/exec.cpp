// SPDX-License-Identifier: Apache-2.0
#include "tensim/exec.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <optional>

#include "tensim/error.hpp"

namespace tensim {

namespace {

constexpr std::uint32_t kMaxCbs = 32;

std::uint32_t align32(std::uint32_t a) { return (a + 31u) & ~31u; }

}  // namespace

struct CoreState {
    CoreLaunch launch;
    std::vector<std::uint8_t> sram = std::vector<std::uint8_t>(kSramBytes, 0);
    std::array<std::optional<CircularBuffer>, kMaxCbs> cbs;
    std::map<std::string, std::uint32_t> buffers;
    TileRegisterFile regs;
    std::vector<Semaphore> sems;
    std::uint64_t memcpy_calls = 0;
    std::uint64_t memcpy_bytes = 0;
    std::uint64_t tile_ops = 0;
    std::array<int, 3> task_ids{-1, -1, -1};
};

class Device {
public:
    Device(DramModel& dram, const CostParams& params, const KernelProgram& prog, std::span<const CoreLaunch> launches,
           const LaunchOptions& opts)
        : dram(dram), params(params), prog(prog), opts(opts), noc(dram, this->params, static_cast<int>(launches.size())) {
        this->params.validate();
        gsems.resize(prog.global_semaphores);
        cores.resize(launches.size());
        for (std::size_t i = 0; i < launches.size(); ++i) {
            CoreState& c = cores[i];
            c.launch = launches[i];
            if (!CoreGrid::is_tensix(c.launch.core)) {
                throw Error(ErrorKind::UnknownCoordinate, fmt::format("({}, {}) is not a Tensix core", c.launch.core.x, c.launch.core.y));
            }
            std::uint32_t top = 0;
            for (const CbConfig& cfg : prog.cbs) {
                if (cfg.index >= kMaxCbs) throw Error(ErrorKind::InvalidConfig, "CB index out of range");
                if (c.cbs[cfg.index]) throw Error(ErrorKind::InvalidConfig, fmt::format("CB {} defined twice", cfg.index));
                c.cbs[cfg.index].emplace(cfg, top, kSramBytes);
                top = align32(top + cfg.page_size * cfg.page_count);
            }
            for (const auto& [name, size] : prog.sram_buffers) {
                if (static_cast<std::uint64_t>(top) + size > kSramBytes) {
                    throw Error(ErrorKind::OutOfBoundsSRAM, "SRAM buffer " + name + " does not fit");
                }
                c.buffers[name] = top;
                top = align32(top + size);
            }
            c.sems.resize(prog.semaphores);
        }
    }

    DramModel& dram;
    CostParams params;
    const KernelProgram& prog;
    LaunchOptions opts;
    Scheduler sched;
    NocEngine noc;
    std::vector<CoreState> cores;
    std::vector<Semaphore> gsems;
    std::vector<std::unique_ptr<KernelContext>> contexts;
};

// ---- awaiters ----

bool WaitAwaiter::await_ready() const {
    CoreState& c = ctx->dev_.cores[ctx->core_];
    switch (what) {
        case What::Reserve: {
            CircularBuffer& cb = ctx->cb(id);
            cb.check_producer(ctx->role_);
            return cb.reserve_ready(n);
        }
        case What::Front: {
            CircularBuffer& cb = ctx->cb(id);
            cb.check_consumer(ctx->role_);
            return cb.wait_ready(n);
        }
        case What::Semaphore: return c.sems.at(id).ready(n);
        case What::GlobalSemaphore: return ctx->dev_.gsems.at(id).ready(n);
    }
    return true;
}

void WaitAwaiter::await_suspend(std::coroutine_handle<> h) const {
    Scheduler& s = ctx->dev_.sched;
    CoreState& c = ctx->dev_.cores[ctx->core_];
    switch (what) {
        case What::Reserve:
            ctx->cb(id).producer_waiter = s.park(h, StallKind::Cb, fmt::format("cb_reserve_back(cb={}, n={})", id, n), n);
            break;
        case What::Front:
            ctx->cb(id).consumer_waiter = s.park(h, StallKind::Cb, fmt::format("cb_wait_front(cb={}, n={})", id, n), n);
            break;
        case What::Semaphore:
            c.sems.at(id).waiters.push_back(s.park(h, StallKind::Semaphore, fmt::format("sem_wait(sem={}, target={})", id, n), n));
            break;
        case What::GlobalSemaphore:
            ctx->dev_.gsems.at(id).waiters.push_back(
                s.park(h, StallKind::Semaphore, fmt::format("global_sem_wait(sem={}, target={})", id, n), n));
            break;
    }
}

void WaitAwaiter::await_resume() const {
    switch (what) {
        case What::Reserve: ctx->cb(id).reserve(n); break;
        case What::Front: ctx->cb(id).mark_waited(n); break;
        default: break;
    }
}

void BarrierAwaiter::await_suspend(std::coroutine_handle<> h) const { ctx->dev_.sched.sleep(h, dt, true); }

void BarrierAwaiter::await_resume() const {
    Device& d = ctx->dev_;
    if (reads) {
        d.noc.complete_reads(ctx->core_, d.cores[ctx->core_].sram);
    } else {
        d.noc.complete_writes(ctx->core_);
    }
}

namespace {

void wake_semaphore(Scheduler& s, Semaphore& sem) {
    auto& w = sem.waiters;
    for (auto it = w.begin(); it != w.end();) {
        if (sem.ready(static_cast<std::uint32_t>(it->need))) {
            s.wake(*it);
            it = w.erase(it);
        } else {
            ++it;
        }
    }
}

}  // namespace

// ---- context ----

CoreCoord KernelContext::core() const { return dev_.cores[core_].launch.core; }

std::uint32_t KernelContext::arg(std::size_t i) const {
    const auto& a = dev_.cores[core_].launch.runtime_args;
    if (i >= a.size()) throw Error(ErrorKind::InvalidConfig, fmt::format("runtime arg {} not bound", i));
    return a[i];
}

std::uint32_t KernelContext::compile_arg(const std::string& name) const {
    auto it = dev_.prog.compile_args.find(name);
    if (it != dev_.prog.compile_args.end()) return it->second;
    return sram_buffer(name);
}

std::uint32_t KernelContext::sram_buffer(const std::string& name) const {
    const auto& b = dev_.cores[core_].buffers;
    auto it = b.find(name);
    if (it == b.end()) throw Error(ErrorKind::InvalidConfig, "unknown compile arg or SRAM buffer " + name);
    return it->second;
}

std::span<std::uint8_t> KernelContext::sram() { return dev_.cores[core_].sram; }
Picos KernelContext::now() const { return dev_.sched.now(); }
const CostParams& KernelContext::params() const { return dev_.params; }
const DramModel& KernelContext::dram() const { return dev_.dram; }
Scheduler& KernelContext::scheduler() { return dev_.sched; }

CircularBuffer& KernelContext::cb(std::uint32_t index) {
    auto& slot = dev_.cores[core_].cbs.at(index);
    if (!slot) throw Error(ErrorKind::InvalidConfig, fmt::format("CB {} not configured", index));
    return *slot;
}

WaitAwaiter KernelContext::cb_reserve_back(std::uint32_t cb, std::uint32_t n) {
    return WaitAwaiter{this, WaitAwaiter::What::Reserve, cb, n};
}

void KernelContext::cb_push_back(std::uint32_t index, std::uint32_t n) {
    CircularBuffer& c = cb(index);
    c.check_producer(role_);
    c.push(n);
    if (c.consumer_waiter && c.committed() >= c.consumer_waiter->need) {
        dev_.sched.wake(*c.consumer_waiter);
        c.consumer_waiter.reset();
    }
}

WaitAwaiter KernelContext::cb_wait_front(std::uint32_t cb, std::uint32_t n) {
    return WaitAwaiter{this, WaitAwaiter::What::Front, cb, n};
}

void KernelContext::cb_pop_front(std::uint32_t index, std::uint32_t n) {
    CircularBuffer& c = cb(index);
    c.check_consumer(role_);
    c.pop(n);
    if (c.producer_waiter && c.free_pages() >= c.producer_waiter->need) {
        dev_.sched.wake(*c.producer_waiter);
        c.producer_waiter.reset();
    }
}

void KernelContext::cb_set_rd_ptr(std::uint32_t index, std::uint32_t address) { cb(index).set_rd_ptr(role_, address); }

std::uint32_t KernelContext::get_write_ptr(std::uint32_t index) const {
    return const_cast<KernelContext*>(this)->cb(index).write_ptr();
}

std::uint32_t KernelContext::get_read_ptr(std::uint32_t index) const {
    auto& c = const_cast<KernelContext*>(this)->cb(index);
    return role_ == KernelRole::Compute ? c.read_ptr() : c.natural_read_ptr();
}

NocAddress KernelContext::get_noc_addr(std::uint32_t noc_x, std::uint32_t noc_y, std::uint64_t offset) const {
    return tensim::get_noc_addr(noc_x, noc_y, offset);
}

NocAddress KernelContext::get_noc_addr(const DramBuffer& buf, std::uint64_t address) const {
    return tensim::get_noc_addr(dev_.dram, buf, address);
}

Delay KernelContext::noc_async_read(const NocAddress& src, std::uint32_t sram_dst, std::uint32_t length) {
    if (!dev_.opts.read) return Delay{&dev_.sched, 0};
    Picos accept = dev_.noc.read(now(), core_, src, sram_dst, length);
    return Delay{&dev_.sched, accept - now()};
}

Delay KernelContext::noc_async_write(std::uint32_t sram_src, const NocAddress& dst, std::uint32_t length) {
    if (!dev_.opts.write) return Delay{&dev_.sched, 0};
    if (static_cast<std::uint64_t>(sram_src) + length > kSramBytes) {
        throw Error(ErrorKind::OutOfBoundsSRAM, fmt::format("write from SRAM [{}, +{})", sram_src, length));
    }
    auto& s = dev_.cores[core_].sram;
    Picos accept = dev_.noc.write(now(), core_, std::span<const std::uint8_t>(s.data() + sram_src, length), dst);
    return Delay{&dev_.sched, accept - now()};
}

Task<> KernelContext::noc_async_read_buffer(const DramBuffer& buf, std::uint64_t address, std::uint32_t sram_dst,
                                            std::uint32_t length) {
    auto segs = dev_.dram.segments(buf, address, length);
    std::uint32_t at = sram_dst;
    for (const BankSegment& s : segs) {
        CoreCoord c = CoreGrid::dram_banks().at(s.bank);
        co_await noc_async_read(NocAddress{c.x, c.y, s.bank_address}, at, static_cast<std::uint32_t>(s.length));
        at += static_cast<std::uint32_t>(s.length);
    }
}

Task<> KernelContext::noc_async_write_buffer(std::uint32_t sram_src, const DramBuffer& buf, std::uint64_t address,
                                             std::uint32_t length) {
    auto segs = dev_.dram.segments(buf, address, length);
    std::uint32_t at = sram_src;
    for (const BankSegment& s : segs) {
        CoreCoord c = CoreGrid::dram_banks().at(s.bank);
        co_await noc_async_write(at, NocAddress{c.x, c.y, s.bank_address}, static_cast<std::uint32_t>(s.length));
        at += static_cast<std::uint32_t>(s.length);
    }
}

BarrierAwaiter KernelContext::noc_async_read_barrier() {
    Picos done = dev_.noc.read_done(core_);
    return BarrierAwaiter{this, true, dev_.noc.reads_pending(core_) ? done - now() : 0};
}

BarrierAwaiter KernelContext::noc_async_write_barrier() {
    Picos done = dev_.noc.write_done(core_);
    return BarrierAwaiter{this, false, dev_.noc.writes_pending(core_) ? done - now() : 0};
}

Delay KernelContext::memcpy(std::uint32_t dst, std::uint32_t src, std::uint32_t length) {
    if (!dev_.opts.memcpy) return Delay{&dev_.sched, 0};
    if (static_cast<std::uint64_t>(dst) + length > kSramBytes || static_cast<std::uint64_t>(src) + length > kSramBytes) {
        throw Error(ErrorKind::OutOfBoundsSRAM, fmt::format("memcpy {} -> {} of {} bytes", src, dst, length));
    }
    CoreState& c = dev_.cores[core_];
    std::memmove(c.sram.data() + dst, c.sram.data() + src, length);
    c.memcpy_calls += 1;
    c.memcpy_bytes += length;
    return Delay{&dev_.sched, ns_to_ps(dev_.params.memcpy_call_ns + length * dev_.params.memcpy_byte_ns)};
}

Delay KernelContext::loop_overhead() { return Delay{&dev_.sched, ns_to_ps(dev_.params.batch_overhead_ns)}; }

void KernelContext::acquire_dst() { dev_.cores[core_].regs.acquire(); }
void KernelContext::release_dst() { dev_.cores[core_].regs.release(); }

Tile32 KernelContext::front_tile(std::uint32_t index, std::uint32_t idx) {
    CircularBuffer& c = cb(index);
    c.check_consumer(role_);
    if (c.committed() <= idx || c.waited() <= idx) {
        throw Error(ErrorKind::NotWaited, fmt::format("tile {} of CB {} read before cb_wait_front", idx, index));
    }
    std::uint32_t addr = c.read_page(idx);
    if (static_cast<std::uint64_t>(addr) + kTileBytes > kSramBytes) {
        throw Error(ErrorKind::OutOfBoundsSRAM, fmt::format("tile read at {}", addr));
    }
    return deserialize_tile(std::span<const std::uint8_t>(dev_.cores[core_].sram.data() + addr, kTileBytes));
}

Delay KernelContext::tile_op(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst,
                             bool mul) {
    if (!dev_.opts.compute) return Delay{&dev_.sched, 0};
    CoreState& c = dev_.cores[core_];
    if (!c.regs.acquired()) throw Error(ErrorKind::NoSession, "tile op outside acquire_dst/release_dst");
    Tile32 a = front_tile(cb_a, idx_a);
    Tile32 b = front_tile(cb_b, idx_b);
    c.regs.store(dst, mul ? tensim::mul_tiles(a, b) : tensim::add_tiles(a, b));
    c.tile_ops += 1;
    return Delay{&dev_.sched, ns_to_ps(dev_.params.tileop_ns)};
}

Delay KernelContext::add_tiles(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst) {
    return tile_op(cb_a, cb_b, idx_a, idx_b, dst, false);
}

Delay KernelContext::mul_tiles(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst) {
    return tile_op(cb_a, cb_b, idx_a, idx_b, dst, true);
}

void KernelContext::pack_tile(int dst, std::uint32_t index, std::uint32_t idx) {
    if (!dev_.opts.compute) return;
    CircularBuffer& c = cb(index);
    c.check_producer(role_);
    if (c.reserved() <= idx) throw Error(ErrorKind::NoReservedPage, fmt::format("pack into CB {} without a reserved page", index));
    const Tile32& t = dev_.cores[core_].regs.load(dst);
    std::uint32_t addr = c.write_page(idx);
    serialize_tile(t, std::span<std::uint8_t>(dev_.cores[core_].sram.data() + addr, kTileBytes));
}

WaitAwaiter KernelContext::sem_wait(std::uint32_t sem, std::uint32_t target) {
    return WaitAwaiter{this, WaitAwaiter::What::Semaphore, sem, target};
}

void KernelContext::sem_set(std::uint32_t sem, std::uint32_t value) {
    Semaphore& s = dev_.cores[core_].sems.at(sem);
    s.set(value);
    wake_semaphore(dev_.sched, s);
}

void KernelContext::sem_inc(std::uint32_t sem, std::uint32_t delta) {
    Semaphore& s = dev_.cores[core_].sems.at(sem);
    s.add(delta);
    wake_semaphore(dev_.sched, s);
}

WaitAwaiter KernelContext::global_sem_wait(std::uint32_t sem, std::uint32_t target) {
    return WaitAwaiter{this, WaitAwaiter::What::GlobalSemaphore, sem, target};
}

Delay KernelContext::global_sem_inc(std::uint32_t sem, std::uint32_t delta) {
    Semaphore& s = dev_.gsems.at(sem);
    s.add(delta);
    wake_semaphore(dev_.sched, s);
    // the remote atomic costs the issuing core one NoC round trip
    return Delay{&dev_.sched, dev_.cores.size() > 1 ? ns_to_ps(dev_.params.sync_roundtrip_ns) : 0, true};
}

// ---- report ----

std::uint64_t RunReport::total_reads() const {
    std::uint64_t n = 0;
    for (const auto& c : cores) n += c.traffic.reads;
    return n;
}

std::uint64_t RunReport::total_writes() const {
    std::uint64_t n = 0;
    for (const auto& c : cores) n += c.traffic.writes;
    return n;
}

std::uint64_t RunReport::total_memcpys() const {
    std::uint64_t n = 0;
    for (const auto& c : cores) n += c.memcpy_calls;
    return n;
}

std::uint64_t RunReport::total_tile_ops() const {
    std::uint64_t n = 0;
    for (const auto& c : cores) n += c.tile_ops;
    return n;
}

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["virtual_seconds"] = virtual_seconds;
    j["energy_joules"] = energy_joules;
    j["events"] = events;
    j["transactions"] = {{"reads", total_reads()}, {"writes", total_writes()}, {"memcpys", total_memcpys()},
                         {"tile_ops", total_tile_ops()}};
    auto& cs = j["cores"] = nlohmann::ordered_json::array();
    for (const CoreReport& c : cores) {
        nlohmann::ordered_json jc;
        jc["core"] = {c.core.x, c.core.y};
        jc["reads"] = c.traffic.reads;
        jc["writes"] = c.traffic.writes;
        jc["read_bytes"] = c.traffic.read_bytes;
        jc["write_bytes"] = c.traffic.write_bytes;
        jc["memcpy_calls"] = c.memcpy_calls;
        jc["memcpy_bytes"] = c.memcpy_bytes;
        jc["tile_ops"] = c.tile_ops;
        auto& ks = jc["kernels"] = nlohmann::ordered_json::array();
        for (const KernelStats& k : c.kernels) {
            ks.push_back({{"name", k.name},
                          {"busy_s", k.busy_s},
                          {"stall_cb_s", k.stall_cb_s},
                          {"stall_semaphore_s", k.stall_sem_s},
                          {"stall_noc_s", k.stall_noc_s},
                          {"finish_s", k.finish_s}});
        }
        cs.push_back(std::move(jc));
    }
    auto& fs = j["faults"] = nlohmann::ordered_json::array();
    for (const FaultRecord& f : faults) {
        fs.push_back({{"virtual_time_s", ps_to_s(f.time)},
                      {"core", f.core},
                      {"kind", f.fault.kind == FaultKind::UnalignedRead ? "UnalignedRead" : "UnalignedWrite"},
                      {"requested_address", f.fault.requested_address},
                      {"effective_address", f.fault.effective_address}});
    }
    return j.dump(2);
}

RunReport launch(DramModel& dram, const CostParams& params, const KernelProgram& program,
                 std::span<const CoreLaunch> cores, const LaunchOptions& options) {
    Device dev(dram, params, program, cores, options);
    const std::array<std::pair<KernelRole, const KernelFn*>, 3> kernels = {
        {{KernelRole::Reader, &program.reader}, {KernelRole::Writer, &program.writer}, {KernelRole::Compute, &program.compute}}};
    for (std::size_t i = 0; i < cores.size(); ++i) {
        for (std::size_t k = 0; k < kernels.size(); ++k) {
            const auto& [role, fn] = kernels[k];
            if (!*fn) continue;
            dev.contexts.push_back(std::make_unique<KernelContext>(dev, static_cast<int>(i), role));
            std::string name = fmt::format("core({},{}).{}", cores[i].core.x, cores[i].core.y, to_string(role));
            dev.cores[i].task_ids[k] = dev.sched.spawn((*fn)(*dev.contexts.back()), name);
        }
    }
    Picos deadline = options.deadline_s >= 1e6 ? kForever : static_cast<Picos>(options.deadline_s * 1e12);
    dev.sched.run(deadline);

    RunReport r;
    Picos end = 0;
    for (const TaskRecord& t : dev.sched.tasks()) end = std::max(end, t.finish);
    r.virtual_seconds = ps_to_s(end);
    r.energy_joules = energy(dev.params, r.virtual_seconds);
    r.events = dev.sched.events_processed();
    r.faults = dev.noc.faults();
    for (std::size_t i = 0; i < cores.size(); ++i) {
        CoreState& c = dev.cores[i];
        CoreReport cr;
        cr.core = c.launch.core;
        cr.traffic = dev.noc.counters(static_cast<int>(i));
        cr.memcpy_calls = c.memcpy_calls;
        cr.memcpy_bytes = c.memcpy_bytes;
        cr.tile_ops = c.tile_ops;
        for (const auto& cb : c.cbs) {
            if (cb) cr.ignored_rd_ptr_overrides += cb->ignored_overrides();
        }
        for (int id : c.task_ids) {
            if (id < 0) continue;
            const TaskRecord& t = dev.sched.tasks()[id];
            cr.kernels.push_back({t.name, ps_to_s(t.busy), ps_to_s(t.stall_cb), ps_to_s(t.stall_sem), ps_to_s(t.stall_noc),
                                  ps_to_s(t.finish)});
        }
        r.cores.push_back(std::move(cr));
    }
    return r;
}

}  // namespace tensim
