// SPDX-License-Identifier: Apache-2.0
#include "tensim/numerics.hpp"

#include <bit>
#include <string>

#include "tensim/error.hpp"

namespace tensim {

float BF16::to_float() const { return bf16_to_fp32(*this); }

BF16 fp32_to_bf16(float x) {
    std::uint32_t u = std::bit_cast<std::uint32_t>(x);
    if ((u & 0x7F800000u) == 0x7F800000u && (u & 0x007FFFFFu) != 0) {
        // NaN keeps sign and upper payload; quiet bit forced only when truncation would yield Inf
        std::uint16_t hi = static_cast<std::uint16_t>(u >> 16);
        if ((hi & 0x007Fu) == 0) hi |= 0x0040u;
        return BF16::from_bits(hi);
    }
    std::uint32_t lsb = (u >> 16) & 1u;
    u += 0x7FFFu + lsb;
    return BF16::from_bits(static_cast<std::uint16_t>(u >> 16));
}

float bf16_to_fp32(BF16 v) {
    return std::bit_cast<float>(static_cast<std::uint32_t>(v.bits()) << 16);
}

BF16 bf16_add(BF16 a, BF16 b) { return fp32_to_bf16(bf16_to_fp32(a) + bf16_to_fp32(b)); }

BF16 bf16_mul(BF16 a, BF16 b) { return fp32_to_bf16(bf16_to_fp32(a) * bf16_to_fp32(b)); }

Tile32 add_tiles(const Tile32& a, const Tile32& b) {
    Tile32 r;
    for (int i = 0; i < kTileElems; ++i) r.elems[i] = bf16_add(a.elems[i], b.elems[i]);
    return r;
}

Tile32 mul_tiles(const Tile32& a, const Tile32& b) {
    Tile32 r;
    for (int i = 0; i < kTileElems; ++i) r.elems[i] = bf16_mul(a.elems[i], b.elems[i]);
    return r;
}

Tile32 scalar_tile(BF16 c) {
    Tile32 r;
    r.elems.fill(c);
    return r;
}

void serialize_tile(const Tile32& t, std::span<std::uint8_t> out) {
    if (out.size() < kTileBytes) throw Error(ErrorKind::OutOfBounds, "tile serialization needs 2048 bytes");
    for (int i = 0; i < kTileElems; ++i) {
        std::uint16_t b = t.elems[i].bits();
        out[2 * i] = static_cast<std::uint8_t>(b & 0xFF);
        out[2 * i + 1] = static_cast<std::uint8_t>(b >> 8);
    }
}

Tile32 deserialize_tile(std::span<const std::uint8_t> in) {
    if (in.size() < kTileBytes) throw Error(ErrorKind::OutOfBounds, "tile deserialization needs 2048 bytes");
    Tile32 t;
    for (int i = 0; i < kTileElems; ++i) {
        t.elems[i] = BF16::from_bits(static_cast<std::uint16_t>(in[2 * i] | (in[2 * i + 1] << 8)));
    }
    return t;
}

void TileRegisterFile::acquire() {
    if (acquired_) throw Error(ErrorKind::DoubleAcquire, "tile registers already acquired");
    acquired_ = true;
    for (auto& s : slots_) s.reset();
}

void TileRegisterFile::release() {
    if (!acquired_) throw Error(ErrorKind::ReleaseWithoutAcquire, "tile registers not acquired");
    acquired_ = false;
}

void TileRegisterFile::check_slot(int slot) const {
    if (!acquired_) throw Error(ErrorKind::NoSession, "tile register access outside acquire/release");
    if (slot < 0 || slot >= kSlots) throw Error(ErrorKind::InvalidSlot, "dst slot " + std::to_string(slot));
}

void TileRegisterFile::store(int slot, const Tile32& t) {
    check_slot(slot);
    slots_[slot] = t;
}

const Tile32& TileRegisterFile::load(int slot) const {
    check_slot(slot);
    if (!slots_[slot]) throw Error(ErrorKind::UnwrittenSlot, "dst slot " + std::to_string(slot) + " never written");
    return *slots_[slot];
}

}  // namespace tensim
