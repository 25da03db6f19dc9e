// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "tensim/sim.hpp"

namespace tensim {

enum class KernelRole { Reader, Writer, Compute };

std::string_view to_string(KernelRole role);

struct CbConfig {
    std::uint32_t index = 0;
    std::uint32_t page_size = 2048;
    std::uint32_t page_count = 4;
    KernelRole producer = KernelRole::Reader;
    KernelRole consumer = KernelRole::Compute;
};

// Paged FIFO in core SRAM. Producer and consumer each keep their own view of the
// descriptor; only the pushed/popped counters are shared.
class CircularBuffer {
public:
    CircularBuffer(CbConfig cfg, std::uint32_t base_address, std::uint32_t sram_size);

    const CbConfig& config() const { return cfg_; }
    std::uint32_t base() const { return base_; }
    std::uint32_t size_bytes() const { return cfg_.page_size * cfg_.page_count; }

    std::uint32_t committed() const { return static_cast<std::uint32_t>(pushed_ - popped_); }
    std::uint32_t free_pages() const { return cfg_.page_count - committed(); }
    std::uint32_t reserved() const { return reserved_; }
    std::uint32_t waited() const { return waited_; }
    std::uint64_t total_pushed() const { return pushed_; }
    std::uint64_t total_popped() const { return popped_; }

    void check_producer(KernelRole caller) const;
    void check_consumer(KernelRole caller) const;

    bool reserve_ready(std::uint32_t n) const;
    void reserve(std::uint32_t n);
    void push(std::uint32_t n);

    bool wait_ready(std::uint32_t n) const;
    void mark_waited(std::uint32_t n);
    void pop(std::uint32_t n);

    std::uint32_t write_ptr() const;
    // Consumer's read pointer, honoring an override.
    std::uint32_t read_ptr() const;
    std::uint32_t natural_read_ptr() const;
    // Address of page idx counted from the producer or consumer pointer.
    std::uint32_t write_page(std::uint32_t idx) const;
    std::uint32_t read_page(std::uint32_t idx) const;

    // Only the compute kernel's copy feeds tile reads; other callers change nothing visible.
    void set_rd_ptr(KernelRole caller, std::uint32_t address);
    bool has_override() const { return override_.has_value(); }
    std::uint64_t ignored_overrides() const { return ignored_overrides_; }

    std::optional<Waiter> producer_waiter;
    std::optional<Waiter> consumer_waiter;

private:
    std::uint32_t page_addr(std::uint64_t counter, std::uint32_t idx) const;

    CbConfig cfg_;
    std::uint32_t base_;
    std::uint32_t sram_size_;
    std::uint64_t pushed_ = 0;
    std::uint64_t popped_ = 0;
    std::uint32_t reserved_ = 0;
    std::uint32_t waited_ = 0;
    std::optional<std::uint32_t> override_;
    std::uint64_t ignored_overrides_ = 0;
};

class Semaphore {
public:
    std::uint32_t value() const { return value_; }
    void set(std::uint32_t v) { value_ = v; }
    void add(std::uint32_t d) { value_ += d; }
    bool ready(std::uint32_t target) const { return value_ >= target; }

    std::vector<Waiter> waiters;

private:
    std::uint32_t value_ = 0;
};

}  // namespace tensim
