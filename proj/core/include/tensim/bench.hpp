// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tensim/cost.hpp"
#include "tensim/dram.hpp"
#include "tensim/exec.hpp"
#include "tensim/jacobi.hpp"

namespace tensim {

enum class SyncMode { PerAccess, PerRow };
enum class AccessOrder { Contiguous, ColumnMajor };
enum class Route { DirectToCB, ViaLocalBufferMemcpy };
// Which data mover uses batch_size / sync_mode / access_order. The other one moves whole
// rows contiguously with one barrier per row.
enum class StreamSide { Read, Write, Both };

std::string_view to_string(SyncMode m);
std::string_view to_string(AccessOrder o);
std::string_view to_string(Route r);
std::string_view to_string(StreamSide s);
SyncMode parse_sync_mode(std::string_view s);
AccessOrder parse_access_order(std::string_view s);
Route parse_route(std::string_view s);
StreamSide parse_stream_side(std::string_view s);

// Read rows from DRAM into a CB on one data mover, write them back out from the other.
struct StreamConfig {
    std::uint32_t width = 4096;
    std::uint32_t height = 4096;
    std::uint32_t element_size = 4;
    std::uint32_t batch_size = 16384;
    SyncMode sync_mode = SyncMode::PerRow;
    AccessOrder access_order = AccessOrder::Contiguous;
    StreamSide varied = StreamSide::Read;
    // Each read also fetches the rows 1..replication-1 above it (wrapping) into scratch SRAM.
    std::uint32_t replication = 1;
    // page_size 0 means SingleBank(0).
    std::uint32_t page_size = 0;
    std::uint32_t cores = 1;
    Route route = Route::DirectToCB;
    // Batches under 32 bytes are necessarily unaligned; by default they are timed and counted
    // as faults rather than aborting the run.
    WriteMode write_mode = WriteMode::PermissiveCorrupting;
    std::uint64_t seed = 42;

    std::uint32_t row_bytes() const { return width * element_size; }
    void validate() const;
};

struct StreamResult {
    double seconds = 0;
    double read_seconds = 0;
    double write_seconds = 0;
    std::uint64_t bytes_moved = 0;
    std::size_t faults = 0;
    bool pass_through = false;
    RunReport report;
};

// Full simulation; the output buffer is compared with the input.
StreamResult run_stream(const StreamConfig& cfg, const CostParams& params);

struct StreamEstimate {
    double seconds = 0;
    double read_seconds = 0;
    double write_seconds = 0;
    std::size_t faults = 0;
    double gpt_s = 0;
    double energy_j = 0;
};

// Simulates two short row counts per core and extrapolates linearly to cfg.height.
StreamEstimate estimate_stream(const StreamConfig& cfg, const CostParams& params);

struct AblationToggles {
    bool read = true;
    bool memcpy = true;
    bool compute = true;
    bool write = true;
};

// Estimated GPt/s of a Jacobi configuration with the disabled phases turned into no-ops.
double run_ablation(const JacobiConfig& cfg, const AblationToggles& toggles, const CostParams& params);

// Cartesian product of stream settings. Empty dimensions take the base config value.
struct SweepGrid {
    StreamConfig base;
    std::vector<StreamSide> varied;
    std::vector<std::uint32_t> batch_sizes;
    std::vector<SyncMode> sync_modes;
    std::vector<AccessOrder> orders;
    std::vector<std::uint32_t> replications;
    std::vector<std::uint32_t> page_sizes;
    std::vector<std::uint32_t> cores;
    std::vector<Route> routes;

    std::vector<StreamConfig> cells() const;
};

struct SweepRow {
    StreamConfig config;
    StreamEstimate estimate;
    std::optional<double> measured_s;
};

std::vector<SweepRow> sweep(const SweepGrid& grid, const CostParams& params);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Named sweeps reproducing the shapes of the published measurements.
struct PresetTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;
};

std::vector<std::string> preset_names();
std::string preset_description(std::string_view name);
PresetTable run_preset(std::string_view name, const CostParams& params);

}  // namespace tensim
