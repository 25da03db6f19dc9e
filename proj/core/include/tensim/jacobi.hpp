// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensim/cost.hpp"
#include "tensim/dram.hpp"
#include "tensim/exec.hpp"
#include "tensim/numerics.hpp"

namespace tensim {

// Fixed values around the interior. A non-empty vector overrides the scalar for that side
// (left/right indexed by row, top/bottom by column).
struct Boundary {
    float left = 1.0f;
    float right = 0.0f;
    float top = 0.0f;
    float bottom = 0.0f;
    std::vector<BF16> left_cells, right_cells, top_cells, bottom_cells;

    BF16 left_at(std::uint32_t row) const;
    BF16 right_at(std::uint32_t row) const;
    BF16 top_at(std::uint32_t col) const;
    BF16 bottom_at(std::uint32_t col) const;
};

struct Domain {
    std::uint32_t nx = 32;
    std::uint32_t ny = 32;
    Boundary boundary;
    float initial = 0.0f;

    std::uint64_t points() const { return static_cast<std::uint64_t>(nx) * ny; }
};

// Interior values only, row-major.
class Grid {
public:
    Grid() = default;
    Grid(std::uint32_t nx, std::uint32_t ny, BF16 fill = {});

    std::uint32_t nx() const { return nx_; }
    std::uint32_t ny() const { return ny_; }
    BF16& at(std::uint32_t r, std::uint32_t c) { return cells_[static_cast<std::size_t>(r) * nx_ + c]; }
    BF16 at(std::uint32_t r, std::uint32_t c) const { return cells_[static_cast<std::size_t>(r) * nx_ + c]; }
    const std::vector<BF16>& cells() const { return cells_; }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::uint32_t nx_ = 0;
    std::uint32_t ny_ = 0;
    std::vector<BF16> cells_;
};

// One stencil update in kernel order: ((W + E) + N) + S, then * 0.25, rounding after each op.
BF16 stencil_update(BF16 w, BF16 e, BF16 n, BF16 s);

Grid reference_solve(const Domain& domain, std::uint32_t iterations);

// First (row, col) where the grids differ, if any.
std::optional<std::pair<std::uint32_t, std::uint32_t>> first_difference(const Grid& a, const Grid& b);

// Grid file: "TSGRID01", then u32 nx, ny, iterations, then nx*ny little-endian BF16.
void write_grid(const Grid& g, std::uint32_t iterations, const std::filesystem::path& path);
Grid read_grid(const std::filesystem::path& path, std::uint32_t* iterations = nullptr);
void write_grid_csv(const Grid& g, const std::filesystem::path& path);

// Device layout of a domain including its boundary ring.
//  Padded:   32-byte lanes left and right, row stride 2*nx + 64, so interior rows start aligned.
//  Unpadded: boundary cells inline, row stride 2*(nx + 2).
enum class LayoutKind { Padded, Unpadded };

struct DomainLayout {
    LayoutKind kind = LayoutKind::Padded;
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;

    DomainLayout(LayoutKind k, std::uint32_t nx, std::uint32_t ny);
    std::uint64_t row_stride() const;
    // r and c range over -1..ny and -1..nx.
    std::uint64_t offset(std::int64_t r, std::int64_t c) const;
    std::uint64_t row_base(std::int64_t r) const { return static_cast<std::uint64_t>(r + 1) * row_stride(); }
    std::uint64_t bytes() const { return row_stride() * (ny + 2); }
};

std::vector<std::uint8_t> encode_domain(const Domain& domain, const DomainLayout& layout);
Grid decode_grid(std::span<const std::uint8_t> bytes, const DomainLayout& layout);

// Reads size bytes at address by fetching from the preceding 32-byte boundary relative to
// starting_address. Returns the offset at which the payload starts in SRAM.
Task<std::uint32_t> read_data_aligned(KernelContext& ctx, const DramBuffer& buf, std::uint64_t address,
                                      std::uint64_t starting_address, std::uint32_t size, std::uint32_t sram_dest);

enum class Variant { Reference, Initial, WriteBatched, DoubleBuffered, Optimized };
enum class ReadPath { Aligned, Naive };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct Subdomain {
    std::uint32_t x0 = 0;
    std::uint32_t y0 = 0;
    std::uint32_t width = 0;
    std::uint32_t height = 0;
};

// Splits nx into cores_x equal blocks of whole granules and ny into cores_y balanced blocks.
std::vector<Subdomain> decompose(const Domain& domain, std::uint32_t cores_x, std::uint32_t cores_y,
                                 std::uint32_t granule_x, std::uint32_t granule_y);

struct CoreLayout {
    std::uint32_t cores_x = 1;
    std::uint32_t cores_y = 1;
    std::uint32_t active() const { return cores_x * cores_y; }
};

// Largest usable cores_x * cores_y <= cores; ties go to more cores in Y.
CoreLayout auto_layout(const Domain& domain, std::uint32_t cores, std::uint32_t granule_x, std::uint32_t granule_y);

std::uint32_t granule_x(Variant v);
std::uint32_t granule_y(Variant v);

struct JacobiConfig {
    Domain domain;
    std::uint32_t iterations = 1;
    Variant variant = Variant::Optimized;
    std::uint32_t cores = 1;
    std::optional<CoreLayout> layout;
    ReadPath read_path = ReadPath::Aligned;
    LayoutKind layout_kind = LayoutKind::Padded;
    WriteMode write_mode = WriteMode::Strict;
    // Default: SingleBank(0) for the tiled kernels, Interleaved(16384) for the row-chunk kernel.
    std::optional<Placement> placement;
    LaunchOptions launch;
};

struct JacobiResult {
    Grid grid;
    RunReport report;
    CoreLayout layout;
    double seconds = 0;
    double gpt_s = 0;
    double energy_j = 0;
};

JacobiResult run_jacobi(const JacobiConfig& cfg, const CostParams& params);

struct JacobiEstimate {
    CoreLayout layout;
    double seconds = 0;
    double gpt_s = 0;
    double energy_j = 0;
    std::uint32_t simulated_iterations_a = 0;
    std::uint32_t simulated_iterations_b = 0;
};

// Simulates two short runs and extrapolates linearly in the iteration count.
JacobiEstimate estimate_jacobi(const JacobiConfig& cfg, const CostParams& params);

}  // namespace tensim
