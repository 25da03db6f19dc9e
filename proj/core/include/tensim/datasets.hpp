// SPDX-License-Identifier: Apache-2.0
#pragma once

// Published measurements compiled into the library, one struct per dataset.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tensim::datasets {

struct VersionRow {
    std::string version;
    double gpt_s;
};

struct AblationRow {
    bool read, memcpy, compute, write;
    double gpt_s;
};

struct BatchRow {
    std::uint32_t batch_bytes;
    std::uint32_t requests_per_row;
    double read_nosync_s, read_sync_s, write_nosync_s, write_sync_s;
};

struct ReplicationRow {
    std::uint32_t replication;
    double runtime_s;
};

// page_bytes == 0 is the single-bank row.
struct PageSizeRow {
    std::uint32_t page_bytes;
    std::array<double, 4> runtime_s;  // by kPageSizeReplication
};

struct CoreScalingRow {
    std::uint32_t page_bytes;
    std::array<double, 4> runtime_s;  // by kCoreScalingCores
};

struct ScalingRow {
    std::string type;
    std::uint32_t total_cores;
    std::optional<std::uint32_t> cores_y, cores_x;
    double gpt_s;
    double energy_j;
    // Number of e150 cards in the row (0 for CPU rows).
    std::uint32_t cards() const;
};

// The replication column labelled 0 means no extra reads, i.e. factor 1.
inline constexpr std::array<std::uint32_t, 4> kPageSizeReplication = {1, 8, 16, 32};
inline constexpr std::array<std::uint32_t, 4> kCoreScalingCores = {1, 2, 4, 8};

// Stream benchmark and Jacobi problem geometry used by the measurements.
inline constexpr std::uint32_t kStreamWidth = 4096;
inline constexpr std::uint32_t kStreamHeight = 4096;
inline constexpr double kMemcpyStreamSeconds = 0.106;
inline constexpr std::uint32_t kTiledDomain = 512;
inline constexpr std::uint32_t kTiledIterations = 10000;
inline constexpr std::uint32_t kScalingNx = 9216;
inline constexpr std::uint32_t kScalingNy = 1024;
inline constexpr std::uint32_t kScalingIterations = 5000;

const std::vector<VersionRow>& versions();
const std::vector<AblationRow>& ablation();
const std::vector<BatchRow>& batch_contiguous();
const std::vector<BatchRow>& batch_noncontiguous();
const std::vector<ReplicationRow>& replication();
const std::vector<PageSizeRow>& page_size();
const std::vector<CoreScalingRow>& core_scaling();
const std::vector<ScalingRow>& scaling();

}  // namespace tensim::datasets
