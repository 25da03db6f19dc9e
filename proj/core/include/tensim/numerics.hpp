// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace tensim {

// bfloat16 stored as its raw bit pattern. Equality is bitwise.
class BF16 {
public:
    constexpr BF16() = default;
    static constexpr BF16 from_bits(std::uint16_t bits) {
        BF16 v;
        v.bits_ = bits;
        return v;
    }
    constexpr std::uint16_t bits() const { return bits_; }
    float to_float() const;

    friend constexpr bool operator==(BF16 a, BF16 b) { return a.bits_ == b.bits_; }

private:
    std::uint16_t bits_ = 0;
};

BF16 fp32_to_bf16(float x);
float bf16_to_fp32(BF16 v);

// Scalar ops: FP32 compute, one rounding to BF16.
BF16 bf16_add(BF16 a, BF16 b);
BF16 bf16_mul(BF16 a, BF16 b);

inline constexpr int kTileDim = 32;
inline constexpr int kTileElems = kTileDim * kTileDim;
inline constexpr std::size_t kTileBytes = kTileElems * 2;

struct Tile32 {
    std::array<BF16, kTileElems> elems{};

    BF16& at(int row, int col) { return elems[row * kTileDim + col]; }
    BF16 at(int row, int col) const { return elems[row * kTileDim + col]; }

    friend bool operator==(const Tile32&, const Tile32&) = default;
};

Tile32 add_tiles(const Tile32& a, const Tile32& b);
Tile32 mul_tiles(const Tile32& a, const Tile32& b);
Tile32 scalar_tile(BF16 c);

// 1024 little-endian 16-bit values, row-major.
void serialize_tile(const Tile32& t, std::span<std::uint8_t> out);
Tile32 deserialize_tile(std::span<const std::uint8_t> in);

// Destination registers of the tile FPU.
class TileRegisterFile {
public:
    static constexpr int kSlots = 16;

    void acquire();
    void release();
    bool acquired() const { return acquired_; }

    void store(int slot, const Tile32& t);
    const Tile32& load(int slot) const;

private:
    void check_slot(int slot) const;

    std::array<std::optional<Tile32>, kSlots> slots_{};
    bool acquired_ = false;
};

}  // namespace tensim
