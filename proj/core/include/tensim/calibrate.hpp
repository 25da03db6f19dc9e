// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tensim/bench.hpp"
#include "tensim/cost.hpp"

namespace tensim {

struct Residual {
    std::string dataset;
    std::string row;
    double predicted = 0;
    double measured = 0;
    double ratio() const { return predicted / measured; }
};

// Rows whose residuals move most with a parameter at the fitted point.
struct ParamConstraint {
    std::string parameter;
    double value = 0;
    std::vector<std::string> rows;
};

struct CalibrationReport {
    CostParams params;
    std::string method;
    int iterations = 0;
    double initial_cost = 0;
    double final_cost = 0;
    // Closed-form model used inside the fit.
    std::vector<Residual> surrogate_residuals;
    // Full simulation with the fitted parameters; empty if not requested.
    std::vector<Residual> residuals;
    std::vector<ParamConstraint> constraints;

    std::string residuals_csv() const;
    std::string summary() const;
};

struct CalibrationOptions {
    CostParams start;
    bool fit_interleave = true;
    bool simulate_residuals = true;
    int max_evaluations = 4000;
};

// Least squares on log runtime against the embedded measurements. Throws FitDiverged.
CalibrationReport calibrate(const CalibrationOptions& options = {});

// Steady-state closed forms of the stream benchmark and of the double-buffered tiled kernel.
double surrogate_stream_seconds(const StreamConfig& cfg, const CostParams& p);
double surrogate_ablation_gpt_s(const AblationToggles& t, const CostParams& p);

}  // namespace tensim
