// SPDX-License-Identifier: Apache-2.0
#pragma once

// Property suites shared by the gtest binaries and the acceptance runner.

#include <cstdint>
#include <string>

namespace props {

struct Outcome {
    bool ok = true;
    std::string detail;
};

// Every BF16 pattern survives BF16 -> FP32 -> BF16, and FP32 -> BF16 matches the neighbour-scan oracle.
Outcome bf16_round_trip();

// Randomized producer/consumer schedules on one CB, checked against a FIFO model and run through the scheduler.
Outcome cb_linearizable(int schedules, std::uint64_t seed);

// Random aligned writes and reads over single-bank and interleaved buffers against a byte oracle.
Outcome dram_fuzz(int cases, std::uint64_t seed);

// Runs the same CLI invocations twice into separate directories and compares every artifact.
Outcome determinism(const std::string& scratch_dir);

}  // namespace props
