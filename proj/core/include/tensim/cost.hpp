// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace tensim {

enum class TxKind { Read, Write };

// Coefficients of the virtual-time model. Times in ns, bandwidth in bytes/s, power in W.
struct CostParams {
    double read_req_ns = 145.0;
    double write_req_ns = 20.0;
    double read_byte_ns = 0.098;
    double write_byte_ns = 0.150;
    double sync_roundtrip_ns = 240.0;
    double noncontig_req_ns = 32.0;
    double memcpy_byte_ns = 1.4;
    double memcpy_call_ns = 480.0;
    double tileop_ns = 150.0;
    double batch_overhead_ns = 135.0;
    // Service rate of one DRAM bank shared by every core that targets it.
    double aggregate_bw_bytes_per_s = 26e9;
    // Page size (bytes) -> per-core streaming rate multiplier for interleaved buffers.
    std::map<std::uint32_t, double> interleave_factor;
    double power_watts = 52.0;

    // Multiplier for a page size; log-linear between fitted sizes, 1 for single-bank buffers.
    double interleave(std::uint32_t page_size) const;
    double req_ns(TxKind k) const { return k == TxKind::Read ? read_req_ns : write_req_ns; }
    double byte_ns(TxKind k) const { return k == TxKind::Read ? read_byte_ns : write_byte_ns; }

    void validate() const;

    friend bool operator==(const CostParams&, const CostParams&) = default;
};

// Isolated single-request latency on an idle core and bank.
double predict_transaction(const CostParams& p, TxKind kind, std::uint64_t length, bool contiguous, bool synced);

double energy(const CostParams& p, double virtual_seconds);
double gpt_per_s(double points, double iterations, double virtual_seconds);

// Flat key=value text; keys are the field names, interleave_factor_<bytes> for the map.
CostParams parse_params(const std::string& text);
CostParams load_params(const std::filesystem::path& path);
std::string format_params(const CostParams& p, const std::string& header = {});
void save_params(const CostParams& p, const std::filesystem::path& path, const std::string& header = {});

// The checked-in calibrated parameter file compiled into the library.
const CostParams& calibrated_params();

}  // namespace tensim
