// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace oracle {

double bf16_value(std::uint16_t bits) {
    const int sign = bits >> 15;
    const int exp = (bits >> 7) & 0xFF;
    const int man = bits & 0x7F;
    double v;
    if (exp == 0xFF) {
        v = man ? std::numeric_limits<double>::quiet_NaN() : std::numeric_limits<double>::infinity();
    } else if (exp == 0) {
        v = std::ldexp(man, -126 - 7);
    } else {
        v = std::ldexp(128 + man, exp - 127 - 7);
    }
    return sign ? -v : v;
}

std::uint16_t bf16_round(float x) {
    if (std::isnan(x)) return 0x7FC0;
    const std::uint32_t u = std::bit_cast<std::uint32_t>(x);
    const std::uint16_t sign = static_cast<std::uint16_t>((u >> 16) & 0x8000);
    const double mag = std::fabs(static_cast<double>(x));
    // Magnitude patterns are ordered like their values, so the neighbours are adjacent codes.
    const std::uint16_t lo = static_cast<std::uint16_t>((u >> 16) & 0x7FFF);
    if (lo == 0x7F80) return sign | lo;
    const std::uint16_t hi = lo + 1;
    const double vlo = bf16_value(lo);
    // The code after the largest finite value rounds as if it were 2^128.
    const double vhi = hi == 0x7F80 ? std::ldexp(1.0, 128) : bf16_value(hi);
    const double dlo = mag - vlo, dhi = vhi - mag;
    std::uint16_t pick;
    if (dlo < dhi) pick = lo;
    else if (dhi < dlo) pick = hi;
    else pick = (lo & 1) ? hi : lo;
    return sign | pick;
}

std::uint16_t add(std::uint16_t a, std::uint16_t b) {
    return bf16_round(static_cast<float>(bf16_value(a) + bf16_value(b)));
}

std::uint16_t mul(std::uint16_t a, std::uint16_t b) {
    return bf16_round(static_cast<float>(bf16_value(a) * bf16_value(b)));
}

tensim::Grid jacobi(const tensim::Domain& d, std::uint32_t iterations) {
    const std::int64_t nx = d.nx, ny = d.ny;
    const std::int64_t w = nx + 2;
    const auto& b = d.boundary;
    std::vector<std::uint16_t> cur(static_cast<std::size_t>(w * (ny + 2)), 0);
    auto at = [&](std::vector<std::uint16_t>& g, std::int64_t r, std::int64_t c) -> std::uint16_t& {
        return g[static_cast<std::size_t>((r + 1) * w + (c + 1))];
    };
    auto side = [](const std::vector<tensim::BF16>& cells, float scalar, std::int64_t i) {
        return cells.empty() ? bf16_round(scalar) : cells[static_cast<std::size_t>(i)].bits();
    };
    for (std::int64_t r = 0; r < ny; ++r) {
        at(cur, r, -1) = side(b.left_cells, b.left, r);
        at(cur, r, nx) = side(b.right_cells, b.right, r);
        for (std::int64_t c = 0; c < nx; ++c) at(cur, r, c) = bf16_round(d.initial);
    }
    for (std::int64_t c = 0; c < nx; ++c) {
        at(cur, -1, c) = side(b.top_cells, b.top, c);
        at(cur, ny, c) = side(b.bottom_cells, b.bottom, c);
    }
    std::vector<std::uint16_t> next = cur;
    const std::uint16_t quarter = bf16_round(0.25f);
    for (std::uint32_t k = 0; k < iterations; ++k) {
        for (std::int64_t r = 0; r < ny; ++r) {
            for (std::int64_t c = 0; c < nx; ++c) {
                std::uint16_t s = add(at(cur, r, c - 1), at(cur, r, c + 1));
                s = add(s, at(cur, r - 1, c));
                s = add(s, at(cur, r + 1, c));
                at(next, r, c) = mul(quarter, s);
            }
        }
        std::swap(cur, next);
    }
    tensim::Grid g(d.nx, d.ny);
    for (std::int64_t r = 0; r < ny; ++r) {
        for (std::int64_t c = 0; c < nx; ++c) {
            g.at(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c)) = tensim::BF16::from_bits(at(cur, r, c));
        }
    }
    return g;
}

void ByteMemory::write(std::uint64_t address, const std::vector<std::uint8_t>& data) {
    const std::uint64_t eff = address / 32 * 32;
    std::copy(data.begin(), data.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(eff - base_));
}

std::vector<std::uint8_t> ByteMemory::read(std::uint64_t address, std::uint64_t length) const {
    const std::uint64_t eff = address / 32 * 32;
    auto first = bytes_.begin() + static_cast<std::ptrdiff_t>(eff - base_);
    return {first, first + static_cast<std::ptrdiff_t>(length)};
}

std::pair<double, double> HandSchedule::issue(double now, std::uint64_t address, std::uint64_t length) {
    const bool contiguous = last_end == ~0ull || last_end == address;
    const double ch_start = std::max(now, channel_free);
    const double ch_end = ch_start + req + length * byte + (contiguous ? 0 : noncontig);
    const double bank_start = std::max(now, bank_free);
    const double bank_end = bank_start + req + length / bytes_per_ns;
    channel_free = ch_end;
    bank_free = bank_end;
    last_end = address + length;
    return {ch_start + req, std::max(ch_end, bank_end) + sync};
}

}  // namespace oracle
