// SPDX-License-Identifier: Apache-2.0
#include "tensim/grid.hpp"

#include "tensim/error.hpp"

namespace tensim {

const std::array<CoreCoord, 8>& CoreGrid::dram_banks() {
    static const std::array<CoreCoord, 8> banks = {{{1, 0}, {1, 6}, {4, 0}, {4, 6}, {7, 0}, {7, 6}, {10, 0}, {10, 6}}};
    return banks;
}

std::optional<std::uint32_t> CoreGrid::bank_at(CoreCoord c) {
    const auto& b = dram_banks();
    for (std::uint32_t i = 0; i < b.size(); ++i) {
        if (b[i] == c) return i;
    }
    return std::nullopt;
}

bool CoreGrid::is_tensix(CoreCoord c) {
    return c.x >= 1 && c.x <= 12 && ((c.y >= 1 && c.y <= 5) || (c.y >= 7 && c.y <= 11));
}

std::vector<CoreCoord> CoreGrid::workers() const {
    if (worker_cores > kTotalCores) throw Error(ErrorKind::InvalidConfig, "worker_cores exceeds 120");
    std::vector<CoreCoord> out;
    for (std::uint32_t y = 1; y < kHeight && out.size() < worker_cores; ++y) {
        if (y == 6) continue;
        for (std::uint32_t x = 1; x <= 12 && out.size() < worker_cores; ++x) out.push_back({x, y});
    }
    return out;
}

}  // namespace tensim
