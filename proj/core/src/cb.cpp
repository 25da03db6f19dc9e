// SPDX-License-Identifier: Apache-2.0
#include "tensim/cb.hpp"

#include <algorithm>
#include <string>

#include "tensim/error.hpp"

namespace tensim {

std::string_view to_string(KernelRole role) {
    switch (role) {
        case KernelRole::Reader: return "reader";
        case KernelRole::Writer: return "writer";
        case KernelRole::Compute: return "compute";
    }
    return "?";
}

CircularBuffer::CircularBuffer(CbConfig cfg, std::uint32_t base_address, std::uint32_t sram_size)
    : cfg_(cfg), base_(base_address), sram_size_(sram_size) {
    if (cfg_.page_count == 0 || cfg_.page_size == 0) throw Error(ErrorKind::InvalidConfig, "empty circular buffer");
    if (static_cast<std::uint64_t>(base_) + size_bytes() > sram_size_) {
        throw Error(ErrorKind::OutOfBoundsSRAM, "CB " + std::to_string(cfg_.index) + " does not fit in SRAM");
    }
}

void CircularBuffer::check_producer(KernelRole caller) const {
    if (caller != cfg_.producer) {
        throw Error(ErrorKind::RoleViolation, std::string(to_string(caller)) + " is not the producer of CB " +
                                                  std::to_string(cfg_.index));
    }
}

void CircularBuffer::check_consumer(KernelRole caller) const {
    if (caller != cfg_.consumer) {
        throw Error(ErrorKind::RoleViolation, std::string(to_string(caller)) + " is not the consumer of CB " +
                                                  std::to_string(cfg_.index));
    }
}

bool CircularBuffer::reserve_ready(std::uint32_t n) const {
    if (n > cfg_.page_count) {
        throw Error(ErrorKind::TooManyPages, "reserve " + std::to_string(n) + " pages on a " +
                                                 std::to_string(cfg_.page_count) + "-page CB");
    }
    return free_pages() >= n;
}

void CircularBuffer::reserve(std::uint32_t n) { reserved_ = std::max(reserved_, n); }

void CircularBuffer::push(std::uint32_t n) {
    if (n == 0 || n > reserved_) {
        throw Error(ErrorKind::NotReserved, "push " + std::to_string(n) + " pages with " + std::to_string(reserved_) +
                                                " reserved on CB " + std::to_string(cfg_.index));
    }
    reserved_ -= n;
    pushed_ += n;
}

bool CircularBuffer::wait_ready(std::uint32_t n) const {
    if (n > cfg_.page_count) {
        throw Error(ErrorKind::TooManyPages, "wait for " + std::to_string(n) + " pages on a " +
                                                 std::to_string(cfg_.page_count) + "-page CB");
    }
    return committed() >= n;
}

void CircularBuffer::mark_waited(std::uint32_t n) { waited_ = std::max(waited_, n); }

void CircularBuffer::pop(std::uint32_t n) {
    if (n == 0 || n > waited_ || n > committed()) {
        throw Error(ErrorKind::NothingToPop, "pop " + std::to_string(n) + " pages with " + std::to_string(waited_) +
                                                 " waited on CB " + std::to_string(cfg_.index));
    }
    waited_ -= n;
    popped_ += n;
    override_.reset();
}

std::uint32_t CircularBuffer::page_addr(std::uint64_t counter, std::uint32_t idx) const {
    return base_ + static_cast<std::uint32_t>((counter + idx) % cfg_.page_count) * cfg_.page_size;
}

std::uint32_t CircularBuffer::write_ptr() const { return page_addr(pushed_, 0); }
std::uint32_t CircularBuffer::natural_read_ptr() const { return page_addr(popped_, 0); }
std::uint32_t CircularBuffer::read_ptr() const { return override_ ? *override_ : natural_read_ptr(); }
std::uint32_t CircularBuffer::write_page(std::uint32_t idx) const { return page_addr(pushed_, idx); }

std::uint32_t CircularBuffer::read_page(std::uint32_t idx) const {
    if (override_) return *override_ + idx * cfg_.page_size;
    return page_addr(popped_, idx);
}

void CircularBuffer::set_rd_ptr(KernelRole caller, std::uint32_t address) {
    if (static_cast<std::uint64_t>(address) + cfg_.page_size > sram_size_) {
        throw Error(ErrorKind::OutOfBoundsSRAM, "rd_ptr " + std::to_string(address) + " beyond SRAM");
    }
    if (caller != KernelRole::Compute) {
        ++ignored_overrides_;
        return;
    }
    if (waited_ == 0) {
        throw Error(ErrorKind::NotWaited, "cb_set_rd_ptr on CB " + std::to_string(cfg_.index) + " before cb_wait_front");
    }
    override_ = address;
}

}  // namespace tensim
