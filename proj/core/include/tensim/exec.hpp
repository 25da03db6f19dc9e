// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tensim/cb.hpp"
#include "tensim/cost.hpp"
#include "tensim/dram.hpp"
#include "tensim/grid.hpp"
#include "tensim/noc.hpp"
#include "tensim/numerics.hpp"
#include "tensim/sim.hpp"

namespace tensim {

class KernelContext;
class Device;

using KernelFn = std::function<Task<>(KernelContext&)>;

struct KernelProgram {
    KernelFn reader;
    KernelFn writer;
    KernelFn compute;
    std::vector<CbConfig> cbs;
    // Named SRAM regions placed after the CBs; their addresses are visible as compile args.
    std::vector<std::pair<std::string, std::uint32_t>> sram_buffers;
    std::map<std::string, std::uint32_t> compile_args;
    std::uint32_t semaphores = 1;
    std::uint32_t global_semaphores = 1;
};

struct CoreLaunch {
    CoreCoord core;
    std::vector<std::uint32_t> runtime_args;
};

struct LaunchOptions {
    // Ablation switches: a disabled phase becomes a zero-cost no-op, CB traffic unchanged.
    bool read = true;
    bool memcpy = true;
    bool compute = true;
    bool write = true;
    double deadline_s = 1e6;
};

// d1 is buffer 0, d2 is buffer 1. Iteration k reads source(k) and writes destination(k),
// so after n iterations the result is in d1 when n is even and in d2 when n is odd.
struct IterationParity {
    static constexpr int source(std::uint32_t k) { return static_cast<int>(k % 2); }
    static constexpr int destination(std::uint32_t k) { return 1 - static_cast<int>(k % 2); }
    static constexpr int result(std::uint32_t iterations) { return static_cast<int>(iterations % 2); }
};

struct KernelStats {
    std::string name;
    double busy_s = 0;
    double stall_cb_s = 0;
    double stall_sem_s = 0;
    double stall_noc_s = 0;
    double finish_s = 0;
};

struct CoreReport {
    CoreCoord core;
    TrafficCounters traffic;
    std::uint64_t memcpy_calls = 0;
    std::uint64_t memcpy_bytes = 0;
    std::uint64_t tile_ops = 0;
    std::uint64_t ignored_rd_ptr_overrides = 0;
    std::vector<KernelStats> kernels;
};

struct RunReport {
    double virtual_seconds = 0;
    double energy_joules = 0;
    std::vector<CoreReport> cores;
    std::vector<FaultRecord> faults;
    std::uint64_t events = 0;

    std::uint64_t total_reads() const;
    std::uint64_t total_writes() const;
    std::uint64_t total_memcpys() const;
    std::uint64_t total_tile_ops() const;
    std::string to_json() const;
};

// Runs reader/writer/compute on every listed core until all finish.
RunReport launch(DramModel& dram, const CostParams& params, const KernelProgram& program,
                 std::span<const CoreLaunch> cores, const LaunchOptions& options = {});

template <typename T>
struct [[nodiscard]] ReadyValue {
    T value;
    bool await_ready() const noexcept { return true; }
    void await_suspend(std::coroutine_handle<>) const noexcept {}
    T await_resume() const noexcept { return value; }
};

// Blocks on a CB or semaphore condition.
struct [[nodiscard]] WaitAwaiter {
    KernelContext* ctx;
    enum class What { Reserve, Front, Semaphore, GlobalSemaphore } what;
    std::uint32_t id;
    std::uint32_t n;

    bool await_ready() const;
    void await_suspend(std::coroutine_handle<> h) const;
    void await_resume() const;
};

// Waits for the core's pending reads or writes, then makes their data visible.
struct [[nodiscard]] BarrierAwaiter {
    KernelContext* ctx;
    bool reads;
    Picos dt;

    bool await_ready() const noexcept { return dt <= 0; }
    void await_suspend(std::coroutine_handle<> h) const;
    void await_resume() const;
};

class KernelContext {
public:
    KernelContext(Device& dev, int core, KernelRole role) : dev_(dev), core_(core), role_(role) {}

    KernelRole role() const { return role_; }
    int core_index() const { return core_; }
    CoreCoord core() const;
    std::uint32_t arg(std::size_t i) const;
    std::uint32_t compile_arg(const std::string& name) const;
    std::uint32_t sram_buffer(const std::string& name) const;
    std::span<std::uint8_t> sram();
    Picos now() const;
    const CostParams& params() const;
    const DramModel& dram() const;
    Scheduler& scheduler();

    // Circular buffers.
    WaitAwaiter cb_reserve_back(std::uint32_t cb, std::uint32_t n);
    void cb_push_back(std::uint32_t cb, std::uint32_t n);
    WaitAwaiter cb_wait_front(std::uint32_t cb, std::uint32_t n);
    void cb_pop_front(std::uint32_t cb, std::uint32_t n);
    void cb_set_rd_ptr(std::uint32_t cb, std::uint32_t address);
    std::uint32_t get_write_ptr(std::uint32_t cb) const;
    std::uint32_t get_read_ptr(std::uint32_t cb) const;
    CircularBuffer& cb(std::uint32_t index);

    // NoC.
    NocAddress get_noc_addr(std::uint32_t noc_x, std::uint32_t noc_y, std::uint64_t offset) const;
    NocAddress get_noc_addr(const DramBuffer& buf, std::uint64_t address) const;
    Delay noc_async_read(const NocAddress& src, std::uint32_t sram_dst, std::uint32_t length);
    Delay noc_async_write(std::uint32_t sram_src, const NocAddress& dst, std::uint32_t length);
    // Issues one request per page touched by a logical buffer range.
    Task<> noc_async_read_buffer(const DramBuffer& buf, std::uint64_t address, std::uint32_t sram_dst,
                                 std::uint32_t length);
    Task<> noc_async_write_buffer(std::uint32_t sram_src, const DramBuffer& buf, std::uint64_t address,
                                  std::uint32_t length);
    BarrierAwaiter noc_async_read_barrier();
    BarrierAwaiter noc_async_write_barrier();

    // Data-mover SRAM copy.
    Delay memcpy(std::uint32_t dst, std::uint32_t src, std::uint32_t length);
    // Fixed cost of one batch of the kernel's main loop.
    Delay loop_overhead();

    // Compute.
    void acquire_dst();
    void release_dst();
    Delay add_tiles(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst);
    Delay mul_tiles(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst);
    void pack_tile(int dst, std::uint32_t cb, std::uint32_t idx = 0);

    // Semaphores local to the core, and device-wide ones used as inter-core barriers.
    WaitAwaiter sem_wait(std::uint32_t sem, std::uint32_t target);
    void sem_set(std::uint32_t sem, std::uint32_t value);
    void sem_inc(std::uint32_t sem, std::uint32_t delta = 1);
    WaitAwaiter global_sem_wait(std::uint32_t sem, std::uint32_t target);
    Delay global_sem_inc(std::uint32_t sem, std::uint32_t delta = 1);

private:
    friend struct WaitAwaiter;
    friend struct BarrierAwaiter;

    Tile32 front_tile(std::uint32_t cb, std::uint32_t idx);
    Delay tile_op(std::uint32_t cb_a, std::uint32_t cb_b, std::uint32_t idx_a, std::uint32_t idx_b, int dst, bool mul);

    Device& dev_;
    int core_;
    KernelRole role_;
};

}  // namespace tensim
