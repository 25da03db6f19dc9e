// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace tensim {

enum class WriteMode { Strict, PermissiveCorrupting };

struct DramConfig {
    std::uint32_t bank_count = 8;
    std::uint64_t bank_size = 1ull << 30;
    std::uint32_t alignment = 32;
    WriteMode write_mode = WriteMode::Strict;
};

struct SingleBank {
    std::uint32_t bank = 0;
};

struct Interleaved {
    std::uint32_t page_size = 16384;
};

using Placement = std::variant<SingleBank, Interleaved>;

inline constexpr std::uint32_t kMaxPageSize = 65536;

struct DramBuffer {
    std::uint32_t id = 0;
    Placement placement;
    std::uint64_t length = 0;
    std::uint64_t base_address = 0;

    bool interleaved() const { return std::holds_alternative<Interleaved>(placement); }
    std::uint32_t page_size() const;  // 0 for single-bank buffers
};

enum class FaultKind { UnalignedRead, UnalignedWrite };

struct AccessFault {
    FaultKind kind;
    std::uint64_t requested_address;
    std::uint64_t effective_address;

    friend bool operator==(const AccessFault&, const AccessFault&) = default;
};

struct ReadResult {
    std::vector<std::uint8_t> bytes;
    std::optional<AccessFault> fault;
};

// A physically contiguous run of a buffer on one bank.
struct BankSegment {
    std::uint32_t bank;
    std::uint64_t bank_address;
    std::uint64_t logical_address;
    std::uint64_t length;
};

class DramModel {
public:
    explicit DramModel(DramConfig config = {});

    const DramConfig& config() const { return config_; }
    void set_write_mode(WriteMode mode);

    DramBuffer allocate(Placement placement, std::uint64_t length);

    // Addresses are logical: base_address + offset into the buffer.
    ReadResult raw_read(const DramBuffer& buf, std::uint64_t address, std::uint64_t length) const;
    std::optional<AccessFault> raw_write(const DramBuffer& buf, std::uint64_t address,
                                         std::span<const std::uint8_t> data);

    // Bank-addressed access used by NoC transactions. No alignment semantics here.
    std::vector<std::uint8_t> read_bank(std::uint32_t bank, std::uint64_t bank_address,
                                        std::uint64_t length) const;
    void write_bank(std::uint32_t bank, std::uint64_t bank_address, std::span<const std::uint8_t> data);

    // Splits a logical range at page boundaries.
    std::vector<BankSegment> segments(const DramBuffer& buf, std::uint64_t address,
                                      std::uint64_t length) const;

    struct Resolved {
        std::uint32_t buffer_id;
        std::uint64_t logical_address;
    };
    std::optional<Resolved> resolve(std::uint32_t bank, std::uint64_t bank_address) const;
    const DramBuffer& buffer(std::uint32_t id) const;

    // Whole-buffer host access (aligned by construction).
    std::span<const std::uint8_t> contents(const DramBuffer& buf) const;
    void load(const DramBuffer& buf, std::span<const std::uint8_t> bytes);
    void export_raw(const DramBuffer& buf, const std::filesystem::path& path) const;
    void import_raw(const DramBuffer& buf, const std::filesystem::path& path);

private:
    struct Store {
        DramBuffer desc;
        std::vector<std::uint8_t> data;
        std::uint64_t pages = 0;
    };

    Store& store(const DramBuffer& buf);
    const Store& store(const DramBuffer& buf) const;
    void check_range(const Store& s, std::uint64_t address, std::uint64_t length) const;
    std::uint64_t align_down(std::uint64_t a) const { return a & ~static_cast<std::uint64_t>(config_.alignment - 1); }
    template <typename F>
    void for_each_piece(std::uint32_t bank, std::uint64_t bank_address, std::uint64_t length, F&& fn) const;

    DramConfig config_;
    mutable std::mutex mu_;
    std::vector<Store> stores_;
    std::vector<std::uint64_t> bank_top_;
};

}  // namespace tensim
