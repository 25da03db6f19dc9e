// SPDX-License-Identifier: Apache-2.0
#include "tensim/dram.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "tensim/error.hpp"

namespace tensim {

namespace {

std::uint64_t align_up(std::uint64_t a, std::uint64_t al) { return (a + al - 1) / al * al; }

}  // namespace

std::uint32_t DramBuffer::page_size() const {
    if (auto* il = std::get_if<Interleaved>(&placement)) return il->page_size;
    return 0;
}

DramModel::DramModel(DramConfig config) : config_(config) {
    if (config_.bank_count == 0) throw Error(ErrorKind::InvalidConfig, "bank_count must be >= 1");
    if (config_.alignment == 0 || (config_.alignment & (config_.alignment - 1)) != 0) {
        throw Error(ErrorKind::InvalidConfig, "alignment must be a power of two");
    }
    bank_top_.assign(config_.bank_count, 0);
}

void DramModel::set_write_mode(WriteMode mode) {
    std::lock_guard lk(mu_);
    config_.write_mode = mode;
}

DramBuffer DramModel::allocate(Placement placement, std::uint64_t length) {
    std::lock_guard lk(mu_);
    if (length == 0) throw Error(ErrorKind::OutOfMemory, "zero-length allocation");
    Store s;
    s.desc.id = static_cast<std::uint32_t>(stores_.size());
    s.desc.placement = placement;
    s.desc.length = length;
    if (auto* sb = std::get_if<SingleBank>(&placement)) {
        if (sb->bank >= config_.bank_count) throw Error(ErrorKind::OutOfMemory, "no such bank " + std::to_string(sb->bank));
        std::uint64_t base = align_up(bank_top_[sb->bank], config_.alignment);
        if (base + length > config_.bank_size) throw Error(ErrorKind::OutOfMemory, "bank " + std::to_string(sb->bank) + " exhausted");
        s.desc.base_address = base;
        bank_top_[sb->bank] = base + length;
    } else {
        std::uint32_t p = std::get<Interleaved>(placement).page_size;
        if (p == 0 || p > kMaxPageSize || p % config_.alignment != 0) {
            throw Error(ErrorKind::InvalidPageSize, "page size " + std::to_string(p));
        }
        s.pages = (length + p - 1) / p;
        std::uint64_t slots = (s.pages + config_.bank_count - 1) / config_.bank_count;
        std::uint64_t base = align_up(*std::max_element(bank_top_.begin(), bank_top_.end()), config_.alignment);
        if (base + slots * p > config_.bank_size) throw Error(ErrorKind::OutOfMemory, "interleaved allocation exhausted banks");
        s.desc.base_address = base;
        std::fill(bank_top_.begin(), bank_top_.end(), base + slots * p);
    }
    s.data.assign(length, 0);
    stores_.push_back(std::move(s));
    return stores_.back().desc;
}

DramModel::Store& DramModel::store(const DramBuffer& buf) {
    if (buf.id >= stores_.size()) throw Error(ErrorKind::OutOfBounds, "unknown buffer");
    return stores_[buf.id];
}

const DramModel::Store& DramModel::store(const DramBuffer& buf) const {
    if (buf.id >= stores_.size()) throw Error(ErrorKind::OutOfBounds, "unknown buffer");
    return stores_[buf.id];
}

const DramBuffer& DramModel::buffer(std::uint32_t id) const {
    std::lock_guard lk(mu_);
    if (id >= stores_.size()) throw Error(ErrorKind::OutOfBounds, "unknown buffer");
    return stores_[id].desc;
}

void DramModel::check_range(const Store& s, std::uint64_t address, std::uint64_t length) const {
    if (address < s.desc.base_address || address + length > s.desc.base_address + s.desc.length || length == 0) {
        throw Error(ErrorKind::OutOfBounds, "access [" + std::to_string(address) + ", +" + std::to_string(length) +
                                                ") outside buffer " + std::to_string(s.desc.id));
    }
}

ReadResult DramModel::raw_read(const DramBuffer& buf, std::uint64_t address, std::uint64_t length) const {
    std::lock_guard lk(mu_);
    const Store& s = store(buf);
    check_range(s, address, length);
    ReadResult r;
    std::uint64_t eff = align_down(address);
    if (eff != address) r.fault = AccessFault{FaultKind::UnalignedRead, address, eff};
    auto first = s.data.begin() + static_cast<std::ptrdiff_t>(eff - s.desc.base_address);
    r.bytes.assign(first, first + static_cast<std::ptrdiff_t>(length));
    return r;
}

std::optional<AccessFault> DramModel::raw_write(const DramBuffer& buf, std::uint64_t address,
                                                std::span<const std::uint8_t> data) {
    std::lock_guard lk(mu_);
    Store& s = store(buf);
    check_range(s, address, data.size());
    std::uint64_t eff = align_down(address);
    std::optional<AccessFault> fault;
    if (eff != address) {
        if (config_.write_mode == WriteMode::Strict) {
            throw Error(ErrorKind::UnalignedWrite, "write at " + std::to_string(address) + " not 32-byte aligned");
        }
        fault = AccessFault{FaultKind::UnalignedWrite, address, eff};
    }
    std::memcpy(s.data.data() + (eff - s.desc.base_address), data.data(), data.size());
    return fault;
}

std::vector<BankSegment> DramModel::segments(const DramBuffer& buf, std::uint64_t address,
                                             std::uint64_t length) const {
    std::lock_guard lk(mu_);
    const Store& s = store(buf);
    check_range(s, address, length);
    std::vector<BankSegment> out;
    if (auto* sb = std::get_if<SingleBank>(&s.desc.placement)) {
        out.push_back({sb->bank, address, address, length});
        return out;
    }
    std::uint64_t p = std::get<Interleaved>(s.desc.placement).page_size;
    std::uint64_t off = address - s.desc.base_address;
    while (length > 0) {
        std::uint64_t page = off / p;
        std::uint64_t within = off % p;
        std::uint64_t n = std::min(length, p - within);
        std::uint32_t bank = static_cast<std::uint32_t>(page % config_.bank_count);
        std::uint64_t bank_addr = s.desc.base_address + (page / config_.bank_count) * p + within;
        out.push_back({bank, bank_addr, s.desc.base_address + off, n});
        off += n;
        length -= n;
    }
    return out;
}

std::optional<DramModel::Resolved> DramModel::resolve(std::uint32_t bank, std::uint64_t bank_address) const {
    for (const Store& s : stores_) {
        const DramBuffer& d = s.desc;
        if (auto* sb = std::get_if<SingleBank>(&d.placement)) {
            if (sb->bank == bank && bank_address >= d.base_address && bank_address < d.base_address + d.length) {
                return Resolved{d.id, bank_address};
            }
            continue;
        }
        std::uint64_t p = std::get<Interleaved>(d.placement).page_size;
        if (bank_address < d.base_address || bank >= config_.bank_count) continue;
        std::uint64_t slot = (bank_address - d.base_address) / p;
        std::uint64_t page = slot * config_.bank_count + bank;
        if (page >= s.pages) continue;
        std::uint64_t logical = d.base_address + page * p + (bank_address - d.base_address) % p;
        if (logical >= d.base_address + d.length) continue;
        return Resolved{d.id, logical};
    }
    return std::nullopt;
}

template <typename F>
void DramModel::for_each_piece(std::uint32_t bank, std::uint64_t bank_address, std::uint64_t length, F&& fn) const {
    std::uint64_t done = 0;
    while (done < length) {
        auto r = resolve(bank, bank_address + done);
        if (!r) {
            throw Error(ErrorKind::OutOfBounds, "bank " + std::to_string(bank) + " address " +
                                                    std::to_string(bank_address + done) + " is not allocated");
        }
        const Store& s = stores_[r->buffer_id];
        std::uint64_t off = r->logical_address - s.desc.base_address;
        std::uint64_t avail = s.desc.length - off;
        if (s.desc.interleaved()) {
            std::uint64_t p = s.desc.page_size();
            avail = std::min(avail, p - off % p);
        }
        std::uint64_t n = std::min(avail, length - done);
        fn(r->buffer_id, off, done, n);
        done += n;
    }
}

std::vector<std::uint8_t> DramModel::read_bank(std::uint32_t bank, std::uint64_t bank_address,
                                               std::uint64_t length) const {
    std::lock_guard lk(mu_);
    std::vector<std::uint8_t> out(length);
    for_each_piece(bank, bank_address, length, [&](std::uint32_t id, std::uint64_t off, std::uint64_t at, std::uint64_t n) {
        std::memcpy(out.data() + at, stores_[id].data.data() + off, n);
    });
    return out;
}

void DramModel::write_bank(std::uint32_t bank, std::uint64_t bank_address, std::span<const std::uint8_t> data) {
    std::lock_guard lk(mu_);
    for_each_piece(bank, bank_address, data.size(), [&](std::uint32_t id, std::uint64_t off, std::uint64_t at, std::uint64_t n) {
        std::memcpy(stores_[id].data.data() + off, data.data() + at, n);
    });
}

std::span<const std::uint8_t> DramModel::contents(const DramBuffer& buf) const {
    std::lock_guard lk(mu_);
    return store(buf).data;
}

void DramModel::load(const DramBuffer& buf, std::span<const std::uint8_t> bytes) {
    std::lock_guard lk(mu_);
    Store& s = store(buf);
    if (bytes.size() != s.data.size()) throw Error(ErrorKind::OutOfBounds, "load size does not match buffer length");
    std::memcpy(s.data.data(), bytes.data(), bytes.size());
}

void DramModel::export_raw(const DramBuffer& buf, const std::filesystem::path& path) const {
    auto bytes = contents(buf);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void DramModel::import_raw(const DramBuffer& buf, const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    load(buf, bytes);
}

}  // namespace tensim
