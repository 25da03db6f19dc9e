// SPDX-License-Identifier: Apache-2.0
#include "tensim/jacobi.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <memory>

#include "tensim/error.hpp"
#include "tensim/grid.hpp"

namespace tensim {

// ---- domain ----

namespace {

BF16 side(const std::vector<BF16>& cells, float scalar, std::uint32_t i) {
    return cells.empty() ? fp32_to_bf16(scalar) : cells.at(i);
}

}  // namespace

BF16 Boundary::left_at(std::uint32_t row) const { return side(left_cells, left, row); }
BF16 Boundary::right_at(std::uint32_t row) const { return side(right_cells, right, row); }
BF16 Boundary::top_at(std::uint32_t col) const { return side(top_cells, top, col); }
BF16 Boundary::bottom_at(std::uint32_t col) const { return side(bottom_cells, bottom, col); }

Grid::Grid(std::uint32_t nx, std::uint32_t ny, BF16 fill)
    : nx_(nx), ny_(ny), cells_(static_cast<std::size_t>(nx) * ny, fill) {}

BF16 stencil_update(BF16 w, BF16 e, BF16 n, BF16 s) {
    static const BF16 quarter = fp32_to_bf16(0.25f);
    return bf16_mul(quarter, bf16_add(bf16_add(bf16_add(w, e), n), s));
}

Grid reference_solve(const Domain& d, std::uint32_t iterations) {
    // Work on arrays that include the boundary ring, swapping each iteration.
    const std::uint32_t w = d.nx + 2;
    const std::uint32_t h = d.ny + 2;
    std::vector<BF16> u(static_cast<std::size_t>(w) * h, fp32_to_bf16(d.initial));
    auto at = [w](std::vector<BF16>& a, std::uint32_t r, std::uint32_t c) -> BF16& { return a[std::size_t(r) * w + c]; };
    for (std::uint32_t r = 0; r < d.ny; ++r) {
        at(u, r + 1, 0) = d.boundary.left_at(r);
        at(u, r + 1, d.nx + 1) = d.boundary.right_at(r);
    }
    for (std::uint32_t c = 0; c < d.nx; ++c) {
        at(u, 0, c + 1) = d.boundary.top_at(c);
        at(u, d.ny + 1, c + 1) = d.boundary.bottom_at(c);
    }
    std::vector<BF16> unew = u;
    for (std::uint32_t it = 0; it < iterations; ++it) {
        for (std::uint32_t r = 1; r <= d.ny; ++r) {
            for (std::uint32_t c = 1; c <= d.nx; ++c) {
                at(unew, r, c) = stencil_update(at(u, r, c - 1), at(u, r, c + 1), at(u, r - 1, c), at(u, r + 1, c));
            }
        }
        std::swap(u, unew);
    }
    Grid g(d.nx, d.ny);
    for (std::uint32_t r = 0; r < d.ny; ++r) {
        for (std::uint32_t c = 0; c < d.nx; ++c) g.at(r, c) = at(u, r + 1, c + 1);
    }
    return g;
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> first_difference(const Grid& a, const Grid& b) {
    if (a.nx() != b.nx() || a.ny() != b.ny()) return std::pair<std::uint32_t, std::uint32_t>{0, 0};
    for (std::uint32_t r = 0; r < a.ny(); ++r) {
        for (std::uint32_t c = 0; c < a.nx(); ++c) {
            if (!(a.at(r, c) == b.at(r, c))) return std::pair{r, c};
        }
    }
    return std::nullopt;
}

// ---- grid files ----

namespace {

constexpr char kGridMagic[8] = {'T', 'S', 'G', 'R', 'I', 'D', '0', '1'};

void put_u32(std::ostream& o, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    o.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_grid(const Grid& g, std::uint32_t iterations, const std::filesystem::path& path) {
    std::ofstream o(path, std::ios::binary);
    if (!o) throw Error(ErrorKind::Io, "cannot write " + path.string());
    o.write(kGridMagic, sizeof kGridMagic);
    put_u32(o, g.nx());
    put_u32(o, g.ny());
    put_u32(o, iterations);
    std::vector<char> bytes(g.cells().size() * 2);
    for (std::size_t i = 0; i < g.cells().size(); ++i) {
        bytes[2 * i] = static_cast<char>(g.cells()[i].bits() & 0xFF);
        bytes[2 * i + 1] = static_cast<char>(g.cells()[i].bits() >> 8);
    }
    o.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!o) throw Error(ErrorKind::Io, "short write to " + path.string());
}

Grid read_grid(const std::filesystem::path& path, std::uint32_t* iterations) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kGridMagic, 8) != 0) throw Error(ErrorKind::Io, path.string() + " is not a grid file");
    std::uint32_t nx = get_u32(in), ny = get_u32(in), it = get_u32(in);
    Grid g(nx, ny);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(nx) * ny * 2);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw Error(ErrorKind::Io, "truncated grid file " + path.string());
    for (std::uint32_t r = 0; r < ny; ++r) {
        for (std::uint32_t c = 0; c < nx; ++c) {
            std::size_t i = std::size_t(r) * nx + c;
            g.at(r, c) = BF16::from_bits(static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8)));
        }
    }
    if (iterations) *iterations = it;
    return g;
}

void write_grid_csv(const Grid& g, const std::filesystem::path& path) {
    std::ofstream o(path);
    if (!o) throw Error(ErrorKind::Io, "cannot write " + path.string());
    std::string line;
    for (std::uint32_t r = 0; r < g.ny(); ++r) {
        line.clear();
        for (std::uint32_t c = 0; c < g.nx(); ++c) {
            if (c) line += ',';
            line += fmt::format("{}", g.at(r, c).to_float());
        }
        o << line << '\n';
    }
}

// ---- layout ----

DomainLayout::DomainLayout(LayoutKind k, std::uint32_t nx_, std::uint32_t ny_) : kind(k), nx(nx_), ny(ny_) {}

std::uint64_t DomainLayout::row_stride() const {
    return kind == LayoutKind::Padded ? 2ull * nx + 64 : 2ull * (nx + 2);
}

std::uint64_t DomainLayout::offset(std::int64_t r, std::int64_t c) const {
    std::uint64_t lead = kind == LayoutKind::Padded ? 32 : 2;
    return row_base(r) + static_cast<std::uint64_t>(static_cast<std::int64_t>(lead) + 2 * c);
}

std::vector<std::uint8_t> encode_domain(const Domain& d, const DomainLayout& l) {
    std::vector<std::uint8_t> out(l.bytes(), 0);
    auto put = [&](std::int64_t r, std::int64_t c, BF16 v) {
        std::uint64_t a = l.offset(r, c);
        out[a] = static_cast<std::uint8_t>(v.bits() & 0xFF);
        out[a + 1] = static_cast<std::uint8_t>(v.bits() >> 8);
    };
    BF16 init = fp32_to_bf16(d.initial);
    for (std::uint32_t r = 0; r < d.ny; ++r) {
        put(r, -1, d.boundary.left_at(r));
        put(r, d.nx, d.boundary.right_at(r));
        for (std::uint32_t c = 0; c < d.nx; ++c) put(r, c, init);
    }
    for (std::uint32_t c = 0; c < d.nx; ++c) {
        put(-1, c, d.boundary.top_at(c));
        put(d.ny, c, d.boundary.bottom_at(c));
    }
    return out;
}

Grid decode_grid(std::span<const std::uint8_t> bytes, const DomainLayout& l) {
    Grid g(l.nx, l.ny);
    for (std::uint32_t r = 0; r < l.ny; ++r) {
        for (std::uint32_t c = 0; c < l.nx; ++c) {
            std::uint64_t a = l.offset(r, c);
            g.at(r, c) = BF16::from_bits(static_cast<std::uint16_t>(bytes[a] | (bytes[a + 1] << 8)));
        }
    }
    return g;
}

Task<std::uint32_t> read_data_aligned(KernelContext& ctx, const DramBuffer& buf, std::uint64_t address,
                                      std::uint64_t starting_address, std::uint32_t size, std::uint32_t sram_dest) {
    std::uint32_t offset = static_cast<std::uint32_t>((address - starting_address) % 32);
    co_await ctx.noc_async_read_buffer(buf, address - offset, sram_dest, size + offset);
    co_return offset;
}

// ---- variants and decomposition ----

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Reference: return "reference";
        case Variant::Initial: return "initial";
        case Variant::WriteBatched: return "write-batched";
        case Variant::DoubleBuffered: return "double-buffered";
        case Variant::Optimized: return "optimized";
    }
    return "?";
}

Variant parse_variant(std::string_view s) {
    for (Variant v : {Variant::Reference, Variant::Initial, Variant::WriteBatched, Variant::DoubleBuffered, Variant::Optimized}) {
        if (s == to_string(v)) return v;
    }
    throw Error(ErrorKind::InvalidConfig, fmt::format("unknown variant '{}'", s));
}

std::uint32_t granule_x(Variant v) { return v == Variant::Optimized ? 16 : 32; }
std::uint32_t granule_y(Variant v) { return v == Variant::Optimized ? 1 : 32; }

std::vector<Subdomain> decompose(const Domain& d, std::uint32_t cx, std::uint32_t cy, std::uint32_t gx, std::uint32_t gy) {
    if (cx == 0 || cy == 0) throw Error(ErrorKind::InvalidConfig, "core counts must be positive");
    if (d.nx % gx != 0 || d.ny % gy != 0) {
        throw Error(ErrorKind::IndivisibleDomain, fmt::format("{}x{} is not a multiple of {}x{}", d.nx, d.ny, gx, gy));
    }
    std::uint32_t ngx = d.nx / gx, ngy = d.ny / gy;
    if (ngx % cx != 0) {
        throw Error(ErrorKind::IndivisibleDomain, fmt::format("{} columns of width {} do not split over {} cores", ngx, gx, cx));
    }
    if (ngy < cy) {
        throw Error(ErrorKind::IndivisibleDomain, fmt::format("{} row blocks cannot feed {} cores in Y", ngy, cy));
    }
    std::vector<Subdomain> out;
    std::uint32_t bw = d.nx / cx;
    std::uint32_t y = 0;
    for (std::uint32_t j = 0; j < cy; ++j) {
        std::uint32_t h = (ngy / cy + (j < ngy % cy ? 1 : 0)) * gy;
        for (std::uint32_t i = 0; i < cx; ++i) out.push_back({i * bw, y, bw, h});
        y += h;
    }
    return out;
}

CoreLayout auto_layout(const Domain& d, std::uint32_t cores, std::uint32_t gx, std::uint32_t gy) {
    if (cores == 0) throw Error(ErrorKind::InvalidConfig, "need at least one core");
    std::uint32_t ngx = std::max(1u, d.nx / gx), ngy = std::max(1u, d.ny / gy);
    CoreLayout best;
    for (std::uint32_t cx = 1; cx <= std::min(cores, ngx); ++cx) {
        if (ngx % cx != 0) continue;
        std::uint32_t cy = std::min(cores / cx, ngy);
        if (cy == 0) continue;
        CoreLayout l{cx, cy};
        if (l.active() > best.active() || (l.active() == best.active() && cy > best.cores_y)) best = l;
    }
    return best;
}

// ---- kernels ----

namespace {

constexpr std::uint32_t kCbIn0 = 0;  // W
constexpr std::uint32_t kCbIn1 = 1;  // E
constexpr std::uint32_t kCbIn2 = 2;  // N
constexpr std::uint32_t kCbIn3 = 3;  // S
constexpr std::uint32_t kCbScalar = 4;
constexpr std::uint32_t kCbOut = 16;
constexpr std::uint32_t kCbInter = 24;
constexpr std::array<std::uint32_t, 4> kInputs = {kCbIn0, kCbIn1, kCbIn2, kCbIn3};

constexpr std::uint32_t kHaloRows = 34;
constexpr std::uint32_t kHaloSlot = 128;
constexpr std::uint32_t kChunk = 1024;
constexpr std::uint32_t kRowSlot = 2 * kChunk + 64;
constexpr std::uint32_t kRingSlots = 4;

struct Plan {
    DomainLayout layout;
    std::array<DramBuffer, 2> d;
    std::uint32_t iterations;
    Variant variant;
    ReadPath read_path;
    std::vector<Subdomain> blocks;
    std::uint32_t active;

    std::uint64_t addr(int buf, std::int64_t r, std::int64_t c) const { return d[buf].base_address + layout.offset(r, c); }
};

using PlanPtr = std::shared_ptr<const Plan>;

struct TileBatch {
    std::uint32_t r0, c0;
};

std::vector<TileBatch> tile_batches(const Subdomain& sd) {
    std::vector<TileBatch> out;
    for (std::uint32_t r = 0; r < sd.height; r += 32) {
        for (std::uint32_t c = 0; c < sd.width; c += 32) out.push_back({sd.y0 + r, sd.x0 + c});
    }
    return out;
}

struct Chunk {
    std::uint32_t x0, width;
};

std::vector<Chunk> row_chunks(const Subdomain& sd) {
    std::vector<Chunk> out;
    std::uint32_t w = std::min(kChunk, sd.width);
    for (std::uint32_t x = 0; x < sd.width; x += w) out.push_back({sd.x0 + x, std::min(w, sd.width - x)});
    return out;
}

Task<> push_scalar(KernelContext& ctx) {
    co_await ctx.cb_reserve_back(kCbScalar, 1);
    serialize_tile(scalar_tile(fp32_to_bf16(0.25f)), ctx.sram().subspan(ctx.get_write_ptr(kCbScalar), kTileBytes));
    ctx.cb_push_back(kCbScalar, 1);
}

Task<> wait_iteration(KernelContext& ctx, const Plan& p, std::uint32_t k) {
    if (k > 0) co_await ctx.global_sem_wait(0, k * p.active);
}

// 34 rows of 34 elements around a 32x32 tile, one request each.
Task<> issue_halo(KernelContext& ctx, const Plan& p, int src, TileBatch b, std::uint32_t lb,
                  std::array<std::uint32_t, kHaloRows>& offs, bool barrier_each) {
    const DramBuffer& buf = p.d[src];
    for (std::uint32_t j = 0; j < kHaloRows; ++j) {
        std::int64_t r = static_cast<std::int64_t>(b.r0) - 1 + j;
        std::uint64_t a = p.addr(src, r, static_cast<std::int64_t>(b.c0) - 1);
        std::uint32_t dst = lb + j * kHaloSlot;
        if (p.read_path == ReadPath::Aligned) {
            offs[j] = co_await read_data_aligned(ctx, buf, a, buf.base_address, kHaloRows * 2, dst);
        } else {
            offs[j] = 0;
            co_await ctx.noc_async_read_buffer(buf, a, dst, kHaloRows * 2);
        }
        if (barrier_each) co_await ctx.noc_async_read_barrier();
    }
}

Task<> tiled_reader(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const auto batches = tile_batches(p.blocks[ctx.core_index()]);
    const bool db = p.variant == Variant::DoubleBuffered;
    const std::array<std::uint32_t, 2> lb = {ctx.sram_buffer("halo0"), db ? ctx.sram_buffer("halo1") : 0u};
    std::array<std::array<std::uint32_t, kHaloRows>, 2> offs{};
    co_await push_scalar(ctx);

    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        co_await wait_iteration(ctx, p, k);
        const int src = IterationParity::source(k);
        if (db && !batches.empty()) co_await issue_halo(ctx, p, src, batches[0], lb[0], offs[0], false);
        for (std::size_t i = 0; i < batches.size(); ++i) {
            co_await ctx.loop_overhead();
            const int cur = db ? static_cast<int>(i % 2) : 0;
            if (db) {
                co_await ctx.noc_async_read_barrier();
                if (i + 1 < batches.size()) {
                    co_await issue_halo(ctx, p, src, batches[i + 1], lb[1 - cur], offs[1 - cur], false);
                }
            } else {
                co_await issue_halo(ctx, p, src, batches[i], lb[0], offs[0], true);
            }
            for (std::uint32_t cb : kInputs) co_await ctx.cb_reserve_back(cb, 1);
            const std::uint32_t base = lb[cur];
            const auto& o = offs[cur];
            for (std::uint32_t row = 0; row < 32; ++row) {
                const std::uint32_t mid = base + (row + 1) * kHaloSlot + o[row + 1];
                co_await ctx.memcpy(ctx.get_write_ptr(kCbIn0) + row * 64, mid, 64);
                co_await ctx.memcpy(ctx.get_write_ptr(kCbIn1) + row * 64, mid + 4, 64);
                co_await ctx.memcpy(ctx.get_write_ptr(kCbIn2) + row * 64, base + row * kHaloSlot + o[row] + 2, 64);
                co_await ctx.memcpy(ctx.get_write_ptr(kCbIn3) + row * 64, base + (row + 2) * kHaloSlot + o[row + 2] + 2, 64);
            }
            for (std::uint32_t cb : kInputs) ctx.cb_push_back(cb, 1);
        }
    }
}

// The stencil sequence shared by both kernels: W+E, +N, +S, then the 0.25 scalar.
Task<> stencil_batch(KernelContext& ctx) {
    ctx.acquire_dst();
    co_await ctx.add_tiles(kCbIn0, kCbIn1, 0, 0, 0);
    co_await ctx.cb_reserve_back(kCbInter, 1);
    ctx.pack_tile(0, kCbInter);
    ctx.cb_push_back(kCbInter, 1);
    ctx.release_dst();
    ctx.cb_pop_front(kCbIn0, 1);
    ctx.cb_pop_front(kCbIn1, 1);

    for (std::uint32_t cb : {kCbIn2, kCbIn3}) {
        co_await ctx.cb_wait_front(kCbInter, 1);
        ctx.acquire_dst();
        co_await ctx.add_tiles(kCbInter, cb, 0, 0, 0);
        ctx.cb_pop_front(kCbInter, 1);
        ctx.cb_pop_front(cb, 1);
        co_await ctx.cb_reserve_back(kCbInter, 1);
        ctx.pack_tile(0, kCbInter);
        ctx.cb_push_back(kCbInter, 1);
        ctx.release_dst();
    }

    co_await ctx.cb_wait_front(kCbInter, 1);
    ctx.acquire_dst();
    co_await ctx.mul_tiles(kCbScalar, kCbInter, 0, 0, 0);
    ctx.cb_pop_front(kCbInter, 1);
    co_await ctx.cb_reserve_back(kCbOut, 1);
    ctx.pack_tile(0, kCbOut);
    ctx.cb_push_back(kCbOut, 1);
    ctx.release_dst();
}

Task<> tiled_compute(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const std::size_t n = tile_batches(p.blocks[ctx.core_index()]).size();
    co_await ctx.cb_wait_front(kCbScalar, 1);
    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            co_await ctx.loop_overhead();
            for (std::uint32_t cb : kInputs) co_await ctx.cb_wait_front(cb, 1);
            co_await stencil_batch(ctx);
        }
    }
    ctx.cb_pop_front(kCbScalar, 1);
}

Task<> tiled_writer(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const auto batches = tile_batches(p.blocks[ctx.core_index()]);
    const bool per_write = p.variant == Variant::Initial;
    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        const int dst = IterationParity::destination(k);
        for (const TileBatch& b : batches) {
            co_await ctx.loop_overhead();
            co_await ctx.cb_wait_front(kCbOut, 1);
            const std::uint32_t rp = ctx.get_read_ptr(kCbOut);
            for (std::uint32_t row = 0; row < 32; ++row) {
                co_await ctx.noc_async_write_buffer(rp + row * 64, p.d[dst], p.addr(dst, b.r0 + row, b.c0), 64);
                if (per_write) co_await ctx.noc_async_write_barrier();
            }
            if (!per_write) co_await ctx.noc_async_write_barrier();
            ctx.cb_pop_front(kCbOut, 1);
        }
        co_await ctx.noc_async_write_barrier();
        co_await ctx.global_sem_inc(0);
    }
}

// Row-chunk kernel. Rows q = 0 .. height+1 of a chunk (grid rows y0-1 .. y0+height) cycle
// through four SRAM slots; batch b consumes rows b, b+1, b+2.
std::uint32_t row_offset(const Plan& p, const Subdomain& sd, const Chunk& ch, std::uint32_t q) {
    return static_cast<std::uint32_t>(p.layout.offset(static_cast<std::int64_t>(sd.y0) - 1 + q, static_cast<std::int64_t>(ch.x0) - 1) % 32);
}

Task<> chunk_reader(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const Subdomain& sd = p.blocks[ctx.core_index()];
    const auto chunks = row_chunks(sd);
    const std::uint32_t ring = ctx.sram_buffer("rows");
    co_await push_scalar(ctx);

    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        co_await wait_iteration(ctx, p, k);
        const int src = IterationParity::source(k);
        const DramBuffer& buf = p.d[src];
        for (const Chunk& ch : chunks) {
            const std::uint32_t rows = sd.height + 2;
            auto read_row = [&](std::uint32_t q) {
                std::uint64_t a = p.addr(src, static_cast<std::int64_t>(sd.y0) - 1 + q, static_cast<std::int64_t>(ch.x0) - 1);
                return read_data_aligned(ctx, buf, a, buf.base_address, 2 * ch.width + 4, ring + (q % kRingSlots) * kRowSlot);
            };
            for (std::uint32_t q = 0; q < std::min(3u, rows); ++q) co_await read_row(q);
            for (std::uint32_t b = 0; b < sd.height; ++b) {
                co_await ctx.loop_overhead();
                for (std::uint32_t cb : kInputs) co_await ctx.cb_reserve_back(cb, 1);
                co_await ctx.noc_async_read_barrier();
                for (std::uint32_t cb : kInputs) ctx.cb_push_back(cb, 1);
                if (b + 3 < rows) co_await read_row(b + 3);
            }
        }
    }
}

Task<> chunk_compute(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const Subdomain& sd = p.blocks[ctx.core_index()];
    const auto chunks = row_chunks(sd);
    const std::uint32_t ring = ctx.compile_arg("rows");
    auto slot = [&](const Chunk& ch, std::uint32_t q) { return ring + (q % kRingSlots) * kRowSlot + row_offset(p, sd, ch, q); };
    co_await ctx.cb_wait_front(kCbScalar, 1);
    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        for (const Chunk& ch : chunks) {
            for (std::uint32_t b = 0; b < sd.height; ++b) {
                co_await ctx.loop_overhead();
                for (std::uint32_t cb : kInputs) co_await ctx.cb_wait_front(cb, 1);
                ctx.cb_set_rd_ptr(kCbIn0, slot(ch, b + 1));
                ctx.cb_set_rd_ptr(kCbIn1, slot(ch, b + 1) + 4);
                ctx.cb_set_rd_ptr(kCbIn2, slot(ch, b) + 2);
                ctx.cb_set_rd_ptr(kCbIn3, slot(ch, b + 2) + 2);
                co_await stencil_batch(ctx);
            }
        }
    }
    ctx.cb_pop_front(kCbScalar, 1);
}

Task<> chunk_writer(KernelContext& ctx, PlanPtr plan) {
    const Plan& p = *plan;
    const Subdomain& sd = p.blocks[ctx.core_index()];
    const auto chunks = row_chunks(sd);
    for (std::uint32_t k = 0; k < p.iterations; ++k) {
        const int dst = IterationParity::destination(k);
        for (const Chunk& ch : chunks) {
            for (std::uint32_t b = 0; b < sd.height; ++b) {
                co_await ctx.loop_overhead();
                co_await ctx.cb_wait_front(kCbOut, 1);
                co_await ctx.noc_async_write_buffer(ctx.get_read_ptr(kCbOut), p.d[dst], p.addr(dst, sd.y0 + b, ch.x0),
                                                    2 * ch.width);
                ctx.cb_pop_front(kCbOut, 1);
            }
            co_await ctx.noc_async_write_barrier();
        }
        co_await ctx.global_sem_inc(0);
    }
}

KernelProgram make_program(const PlanPtr& plan) {
    KernelProgram prog;
    const bool chunked = plan->variant == Variant::Optimized;
    for (std::uint32_t cb : kInputs) prog.cbs.push_back({cb, 2048, chunked ? 1u : 4u, KernelRole::Reader, KernelRole::Compute});
    prog.cbs.push_back({kCbScalar, 2048, 1, KernelRole::Reader, KernelRole::Compute});
    prog.cbs.push_back({kCbInter, 2048, 4, KernelRole::Compute, KernelRole::Compute});
    prog.cbs.push_back({kCbOut, 2048, 4, KernelRole::Compute, KernelRole::Writer});
    if (chunked) {
        prog.sram_buffers.push_back({"rows", kRingSlots * kRowSlot});
        prog.reader = [plan](KernelContext& c) { return chunk_reader(c, plan); };
        prog.compute = [plan](KernelContext& c) { return chunk_compute(c, plan); };
        prog.writer = [plan](KernelContext& c) { return chunk_writer(c, plan); };
    } else {
        prog.sram_buffers.push_back({"halo0", kHaloRows * kHaloSlot});
        if (plan->variant == Variant::DoubleBuffered) prog.sram_buffers.push_back({"halo1", kHaloRows * kHaloSlot});
        prog.reader = [plan](KernelContext& c) { return tiled_reader(c, plan); };
        prog.compute = [plan](KernelContext& c) { return tiled_compute(c, plan); };
        prog.writer = [plan](KernelContext& c) { return tiled_writer(c, plan); };
    }
    return prog;
}

void validate(const JacobiConfig& cfg) {
    const Domain& d = cfg.domain;
    if (d.nx == 0 || d.ny == 0) throw Error(ErrorKind::InvalidConfig, "domain must be non-empty");
    if (cfg.variant == Variant::Reference) return;
    if (d.nx % 16 != 0) throw Error(ErrorKind::IndivisibleDomain, fmt::format("nx = {} is not a multiple of 16", d.nx));
    if (cfg.variant != Variant::Optimized && (d.nx % 32 != 0 || d.ny % 32 != 0)) {
        throw Error(ErrorKind::IndivisibleDomain, fmt::format("tiled kernels need nx, ny multiples of 32, got {}x{}", d.nx, d.ny));
    }
    if (cfg.cores == 0 || cfg.cores > CoreGrid{}.worker_cores) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("cores must be in 1..{}", CoreGrid{}.worker_cores));
    }
    if (cfg.layout && cfg.layout->active() > CoreGrid{}.worker_cores) {
        throw Error(ErrorKind::InvalidConfig, "core layout exceeds the worker grid");
    }
}

}  // namespace

JacobiResult run_jacobi(const JacobiConfig& cfg, const CostParams& params) {
    validate(cfg);
    JacobiResult res;
    if (cfg.variant == Variant::Reference) {
        res.grid = reference_solve(cfg.domain, cfg.iterations);
        return res;
    }
    const std::uint32_t gx = granule_x(cfg.variant), gy = granule_y(cfg.variant);
    res.layout = cfg.layout ? *cfg.layout : auto_layout(cfg.domain, cfg.cores, gx, gy);

    auto plan = std::make_shared<Plan>(Plan{DomainLayout(cfg.layout_kind, cfg.domain.nx, cfg.domain.ny),
                                            {},
                                            cfg.iterations,
                                            cfg.variant,
                                            cfg.read_path,
                                            decompose(cfg.domain, res.layout.cores_x, res.layout.cores_y, gx, gy),
                                            res.layout.active()});

    DramConfig dc;
    dc.write_mode = cfg.write_mode;
    DramModel dram(dc);
    Placement placement = cfg.placement ? *cfg.placement
                                        : (cfg.variant == Variant::Optimized ? Placement{Interleaved{16384}} : Placement{SingleBank{0}});
    const auto image = encode_domain(cfg.domain, plan->layout);
    for (auto& b : plan->d) {
        b = dram.allocate(placement, plan->layout.bytes());
        dram.load(b, image);
    }

    if (cfg.iterations > 0) {
        const auto workers = CoreGrid{}.workers();
        std::vector<CoreLaunch> launches;
        for (std::uint32_t i = 0; i < plan->active; ++i) launches.push_back({workers[i], {}});
        res.report = launch(dram, params, make_program(plan), launches, cfg.launch);
    }
    res.grid = decode_grid(dram.contents(plan->d[IterationParity::result(cfg.iterations)]), plan->layout);
    res.seconds = res.report.virtual_seconds;
    res.energy_j = res.report.energy_joules;
    if (res.seconds > 0) res.gpt_s = gpt_per_s(static_cast<double>(cfg.domain.points()), cfg.iterations, res.seconds);
    return res;
}

JacobiEstimate estimate_jacobi(const JacobiConfig& cfg, const CostParams& params) {
    if (cfg.variant == Variant::Reference) throw Error(ErrorKind::InvalidConfig, "the reference solver has no device timing");
    if (cfg.iterations == 0) throw Error(ErrorKind::InvalidConfig, "estimate needs at least one iteration");
    JacobiEstimate e;
    JacobiConfig c = cfg;
    if (cfg.iterations <= 3) {
        JacobiResult r = run_jacobi(c, params);
        e.layout = r.layout;
        e.seconds = r.seconds;
        e.simulated_iterations_a = e.simulated_iterations_b = cfg.iterations;
    } else {
        c.iterations = 2;
        JacobiResult a = run_jacobi(c, params);
        c.iterations = 3;
        JacobiResult b = run_jacobi(c, params);
        e.layout = a.layout;
        e.seconds = a.seconds + (cfg.iterations - 2.0) * (b.seconds - a.seconds);
        e.simulated_iterations_a = 2;
        e.simulated_iterations_b = 3;
    }
    e.energy_j = energy(params, e.seconds);
    if (e.seconds > 0) e.gpt_s = gpt_per_s(static_cast<double>(cfg.domain.points()), cfg.iterations, e.seconds);
    return e;
}

}  // namespace tensim
