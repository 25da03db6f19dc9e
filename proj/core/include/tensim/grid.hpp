// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

namespace tensim {

struct CoreCoord {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    friend auto operator<=>(const CoreCoord&, const CoreCoord&) = default;
};

inline constexpr std::uint32_t kSramBytes = 1u << 20;

// Grayskull-style 13x12 NoC grid: DRAM banks in rows 0 and 6, Tensix cores elsewhere.
struct CoreGrid {
    static constexpr std::uint32_t kWidth = 13;
    static constexpr std::uint32_t kHeight = 12;
    static constexpr std::uint32_t kTotalCores = 120;
    std::uint32_t worker_cores = 108;
    double clock_ghz = 1.2;

    static const std::array<CoreCoord, 8>& dram_banks();
    static std::optional<std::uint32_t> bank_at(CoreCoord c);
    static bool is_tensix(CoreCoord c);
    // Worker cores in row-major order, first worker_cores of the 120.
    std::vector<CoreCoord> workers() const;
};

}  // namespace tensim
