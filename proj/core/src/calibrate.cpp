// SPDX-License-Identifier: Apache-2.0
#include "tensim/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Core>
#include <fmt/format.h>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <unsupported/Eigen/NumericalDiff>

#include "tensim/datasets.hpp"
#include "tensim/error.hpp"

namespace tensim {

// ---- closed forms ----

namespace {

constexpr double kBlockRows = 2;
constexpr double kBanks = 8;

struct Side {
    double batch;
    SyncMode sync;
    AccessOrder order;
};

Side side_of(const StreamConfig& c, bool read) {
    bool varied = c.varied == StreamSide::Both || (c.varied == StreamSide::Read) == read;
    if (varied) return {static_cast<double>(c.batch_size), c.sync_mode, c.access_order};
    return {static_cast<double>(c.row_bytes()), SyncMode::PerRow, AccessOrder::Contiguous};
}

struct RowCost {
    double core_ns = 0;  // time one data mover spends per row
    double bank_ns = 0;  // bank occupancy per row
};

RowCost mover_row(const StreamConfig& c, const CostParams& p, bool read) {
    const TxKind k = read ? TxKind::Read : TxKind::Write;
    const Side s = side_of(c, read);
    const double rb = c.row_bytes();
    const double n = rb / s.batch;
    const double copies = read ? c.replication : 1;
    const double f = c.page_size ? p.interleave(c.page_size) : 1.0;
    const double segs = c.page_size ? std::max(1.0, s.batch / c.page_size) : 1.0;
    const double requests = n * copies * segs;
    const bool scattered = c.page_size != 0 || copies > 1 || (s.order == AccessOrder::ColumnMajor && n > 1);
    RowCost r;
    r.core_ns = requests * p.req_ns(k) + copies * rb * p.byte_ns(k) / f + (scattered ? requests * p.noncontig_req_ns : 0) +
                (s.sync == SyncMode::PerAccess ? n : 1) * p.sync_roundtrip_ns;
    if (read && c.route == Route::ViaLocalBufferMemcpy) r.core_ns += p.memcpy_call_ns + rb * p.memcpy_byte_ns;
    r.bank_ns = requests * p.req_ns(k) + copies * rb / p.aggregate_bw_bytes_per_s * 1e9;
    return r;
}

}  // namespace

double surrogate_stream_seconds(const StreamConfig& c, const CostParams& p) {
    const RowCost rd = mover_row(c, p, true);
    const RowCost wr = mover_row(c, p, false);
    const double rows = std::ceil(static_cast<double>(c.height) / c.cores);
    const double banks = c.page_size ? kBanks : 1.0;
    const double core_bound = rows * std::max(rd.core_ns, wr.core_ns);
    const double bank_bound = c.height * (rd.bank_ns + wr.bank_ns) / banks;
    // The first block of the faster side does not overlap with the slower one.
    const double fill = kBlockRows * std::min(rd.core_ns, wr.core_ns);
    return (std::max(core_bound, bank_bound) + fill) * 1e-9;
}

double surrogate_ablation_gpt_s(const AblationToggles& t, const CostParams& p) {
    constexpr double kHaloReads = 34, kHaloBytes = 98, kCopies = 128, kCopyBytes = 64, kRows = 32, kRowBytes = 64;
    constexpr double kTileOps = 4, kPoints = 1024;
    const double ovh = p.batch_overhead_ns;
    const double occ_r = p.read_req_ns + kHaloBytes * p.read_byte_ns + p.noncontig_req_ns;
    const double occ_w = p.write_req_ns + kRowBytes * p.write_byte_ns + p.noncontig_req_ns;
    const double copies = t.memcpy ? kCopies * (p.memcpy_call_ns + kCopyBytes * p.memcpy_byte_ns) : 0;
    double reader = ovh + copies;
    if (t.read) {
        // Reads for the next batch are in flight while this batch is copied out.
        reader += kHaloReads * occ_r + std::max(0.0, occ_r - p.read_req_ns + p.sync_roundtrip_ns - copies - ovh);
    }
    const double compute = ovh + (t.compute ? kTileOps * p.tileop_ns : 0);
    const double writer = ovh + (t.write ? kRows * occ_w + p.sync_roundtrip_ns : 0);
    return kPoints / std::max({reader, compute, writer});
}

// ---- observations ----

namespace {

struct Observation {
    std::string dataset;
    std::string label;
    bool ablation = false;
    StreamConfig stream;
    AblationToggles toggles;
    double measured = 0;  // seconds, or GPt/s for ablation rows
};

std::string yn(bool b) { return b ? "Y" : "N"; }

std::string stream_label(const StreamConfig& c) {
    std::string s = fmt::format("{} batch={} {} {}", to_string(c.varied), c.batch_size, to_string(c.sync_mode),
                                to_string(c.access_order));
    if (c.replication != 1) s = fmt::format("replication={}", c.replication);
    if (c.route == Route::ViaLocalBufferMemcpy) s = "memcpy route";
    if (c.page_size || c.cores != 1) s = fmt::format("page={} replication={} cores={}", c.page_size, c.replication, c.cores);
    return s;
}

void add_batch(std::vector<Observation>& out, const std::string& name, const std::vector<datasets::BatchRow>& rows,
               AccessOrder order) {
    for (StreamSide side : {StreamSide::Read, StreamSide::Write}) {
        for (SyncMode sync : {SyncMode::PerRow, SyncMode::PerAccess}) {
            for (const auto& d : rows) {
                Observation o;
                o.dataset = name;
                o.stream.varied = side;
                o.stream.batch_size = d.batch_bytes;
                o.stream.sync_mode = sync;
                o.stream.access_order = order;
                o.measured = side == StreamSide::Read ? (sync == SyncMode::PerRow ? d.read_nosync_s : d.read_sync_s)
                                                   : (sync == SyncMode::PerRow ? d.write_nosync_s : d.write_sync_s);
                o.label = stream_label(o.stream);
                out.push_back(o);
            }
        }
    }
}

// Rows fitted by least squares. Interleaved rows are handled by the per-page search.
std::vector<Observation> fit_observations() {
    std::vector<Observation> out;
    add_batch(out, "batch-contiguous", datasets::batch_contiguous(), AccessOrder::Contiguous);
    add_batch(out, "batch-noncontiguous", datasets::batch_noncontiguous(), AccessOrder::ColumnMajor);
    {
        Observation o;
        o.dataset = "memcpy";
        o.stream.route = Route::ViaLocalBufferMemcpy;
        o.measured = datasets::kMemcpyStreamSeconds;
        o.label = stream_label(o.stream);
        out.push_back(o);
    }
    for (const auto& d : datasets::replication()) {
        Observation o;
        o.dataset = "replication";
        o.stream.replication = d.replication;
        o.measured = d.runtime_s;
        o.label = stream_label(o.stream);
        out.push_back(o);
    }
    for (const auto& d : datasets::core_scaling()) {
        if (d.page_bytes != 0) continue;
        for (std::size_t i = 0; i < datasets::kCoreScalingCores.size(); ++i) {
            Observation o;
            o.dataset = "core-scaling";
            o.stream.cores = datasets::kCoreScalingCores[i];
            o.measured = d.runtime_s[i];
            o.label = stream_label(o.stream);
            out.push_back(o);
        }
    }
    for (const auto& d : datasets::ablation()) {
        Observation o;
        o.dataset = "ablation";
        o.ablation = true;
        o.toggles = {d.read, d.memcpy, d.compute, d.write};
        o.measured = d.gpt_s;
        o.label = "read=" + yn(d.read) + " memcpy=" + yn(d.memcpy) + " compute=" + yn(d.compute) + " write=" + yn(d.write);
        out.push_back(o);
    }
    return out;
}

std::vector<Observation> interleaved_observations() {
    std::vector<Observation> out;
    for (const auto& d : datasets::page_size()) {
        for (std::size_t i = 0; i < datasets::kPageSizeReplication.size(); ++i) {
            Observation o;
            o.dataset = "page-size";
            o.stream.page_size = d.page_bytes;
            o.stream.replication = datasets::kPageSizeReplication[i];
            o.measured = d.runtime_s[i];
            o.label = stream_label(o.stream);
            out.push_back(o);
        }
    }
    for (const auto& d : datasets::core_scaling()) {
        if (d.page_bytes == 0) continue;
        for (std::size_t i = 0; i < datasets::kCoreScalingCores.size(); ++i) {
            Observation o;
            o.dataset = "core-scaling";
            o.stream.page_size = d.page_bytes;
            o.stream.cores = datasets::kCoreScalingCores[i];
            o.measured = d.runtime_s[i];
            o.label = stream_label(o.stream);
            out.push_back(o);
        }
    }
    return out;
}

double surrogate(const Observation& o, const CostParams& p) {
    return o.ablation ? surrogate_ablation_gpt_s(o.toggles, p) : surrogate_stream_seconds(o.stream, p);
}

JacobiConfig ablation_config() {
    JacobiConfig c;
    c.domain.nx = c.domain.ny = datasets::kTiledDomain;
    c.iterations = datasets::kTiledIterations;
    c.variant = Variant::DoubleBuffered;
    return c;
}

double simulate(const Observation& o, const CostParams& p) {
    return o.ablation ? run_ablation(ablation_config(), o.toggles, p) : estimate_stream(o.stream, p).seconds;
}

// ---- least squares ----

struct Field {
    const char* name;
    double CostParams::*member;
};

constexpr Field kFitted[] = {
    {"read_req_ns", &CostParams::read_req_ns},
    {"write_req_ns", &CostParams::write_req_ns},
    {"read_byte_ns", &CostParams::read_byte_ns},
    {"write_byte_ns", &CostParams::write_byte_ns},
    {"sync_roundtrip_ns", &CostParams::sync_roundtrip_ns},
    {"noncontig_req_ns", &CostParams::noncontig_req_ns},
    {"memcpy_byte_ns", &CostParams::memcpy_byte_ns},
    {"memcpy_call_ns", &CostParams::memcpy_call_ns},
    {"tileop_ns", &CostParams::tileop_ns},
    {"batch_overhead_ns", &CostParams::batch_overhead_ns},
    {"aggregate_bw_bytes_per_s", &CostParams::aggregate_bw_bytes_per_s},
};
constexpr int kParams = static_cast<int>(std::size(kFitted));
// Pulls parameters no row constrains back toward the starting point.
constexpr double kPriorWeight = 0.02;

CostParams apply(const CostParams& base, const Eigen::VectorXd& x) {
    CostParams p = base;
    for (int i = 0; i < kParams; ++i) p.*kFitted[i].member = std::exp(x[i]);
    return p;
}

struct LogResidual : Eigen::DenseFunctor<double> {
    const std::vector<Observation>* obs;
    CostParams base;
    Eigen::VectorXd x0;

    LogResidual(const std::vector<Observation>* o, const CostParams& b, const Eigen::VectorXd& start)
        : Eigen::DenseFunctor<double>(kParams, static_cast<int>(o->size()) + kParams), obs(o), base(b), x0(start) {}

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& fvec) const {
        const CostParams p = apply(base, x);
        const int n = static_cast<int>(obs->size());
        for (int i = 0; i < n; ++i) {
            const double v = surrogate((*obs)[i], p);
            fvec[i] = std::isfinite(v) && v > 0 ? std::log(v / (*obs)[i].measured) : 1e3;
        }
        for (int j = 0; j < kParams; ++j) fvec[n + j] = kPriorWeight * (x[j] - x0[j]);
        return 0;
    }
};

double half_sq(const Eigen::VectorXd& r) { return 0.5 * r.squaredNorm(); }

std::vector<ParamConstraint> constraints_at(const LogResidual& f, const Eigen::VectorXd& x, const CostParams& fitted) {
    const int n = static_cast<int>(f.obs->size());
    Eigen::VectorXd r0(f.values()), r1(f.values());
    f(x, r0);
    std::vector<ParamConstraint> out;
    constexpr double h = 1e-4;
    for (int j = 0; j < kParams; ++j) {
        Eigen::VectorXd xp = x;
        xp[j] += h;
        f(xp, r1);
        std::vector<std::pair<double, int>> sens;
        for (int i = 0; i < n; ++i) sens.push_back({std::abs(r1[i] - r0[i]) / h, i});
        std::sort(sens.begin(), sens.end(), [](auto& a, auto& b) { return a.first > b.first; });
        ParamConstraint c{kFitted[j].name, fitted.*kFitted[j].member, {}};
        for (const auto& [s, i] : sens) {
            if (s < 0.05 || s < 0.25 * sens.front().first || c.rows.size() == 6) break;
            c.rows.push_back((*f.obs)[i].dataset + ": " + (*f.obs)[i].label);
        }
        out.push_back(std::move(c));
    }
    return out;
}

// Golden-section search in log space for the interleave factor of one page size.
double fit_interleave(CostParams& p, std::uint32_t page, const std::vector<Observation>& rows) {
    auto cost = [&](double logf) {
        p.interleave_factor[page] = std::exp(logf);
        double s = 0;
        for (const auto& o : rows) {
            const double r = std::log(simulate(o, p) / o.measured);
            s += r * r;
        }
        return s;
    };
    const double g = (std::sqrt(5.0) - 1) / 2;
    double a = std::log(0.1), b = std::log(20.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = cost(c), fd = cost(d);
    while (b - a > 1e-3) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    const double best = std::exp((a + b) / 2);
    p.interleave_factor[page] = best;
    return best;
}

std::string lm_status(Eigen::LevenbergMarquardtSpace::Status s) {
    using namespace Eigen::LevenbergMarquardtSpace;
    switch (s) {
        case RelativeReductionTooSmall: return "relative reduction";
        case RelativeErrorTooSmall: return "relative error";
        case RelativeErrorAndReductionTooSmall: return "relative error and reduction";
        case CosinusTooSmall: return "gradient orthogonal";
        case TooManyFunctionEvaluation: return "evaluation limit";
        case FtolTooSmall: return "ftol";
        case XtolTooSmall: return "xtol";
        case GtolTooSmall: return "gtol";
        default: return "status " + std::to_string(static_cast<int>(s));
    }
}

}  // namespace

CalibrationReport calibrate(const CalibrationOptions& options) {
    options.start.validate();
    const std::vector<Observation> obs = fit_observations();

    Eigen::VectorXd x(kParams);
    for (int i = 0; i < kParams; ++i) x[i] = std::log(options.start.*kFitted[i].member);
    LogResidual f(&obs, options.start, x);
    Eigen::VectorXd r(f.values());
    f(x, r);

    CalibrationReport rep;
    rep.initial_cost = half_sq(r);

    Eigen::NumericalDiff<LogResidual> nd(f);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LogResidual>> lm(nd);
    lm.setMaxfev(options.max_evaluations);
    const auto status = lm.minimize(x);

    f(x, r);
    rep.final_cost = half_sq(r);
    rep.iterations = static_cast<int>(lm.iterations());
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !x.allFinite() || !std::isfinite(rep.final_cost) ||
        rep.final_cost > rep.initial_cost) {
        throw Error(ErrorKind::FitDiverged, fmt::format("least squares stopped on {} with cost {} (start {})", lm_status(status),
                                                        rep.final_cost, rep.initial_cost));
    }
    rep.params = apply(options.start, x);
    rep.method = fmt::format("Levenberg-Marquardt on log runtime, {} rows, {} parameters, stopped on {}", obs.size(), kParams,
                             lm_status(status));
    rep.constraints = constraints_at(f, x, rep.params);
    for (const auto& o : obs) rep.surrogate_residuals.push_back({o.dataset, o.label, surrogate(o, rep.params), o.measured});

    const std::vector<Observation> inter = interleaved_observations();
    if (options.fit_interleave) {
        rep.params.interleave_factor.clear();
        ParamConstraint pages{"interleave_factor", 0, {}};
        for (const auto& d : datasets::page_size()) {
            if (d.page_bytes == 0) continue;
            std::vector<Observation> rows;
            for (const auto& o : inter) {
                if (o.dataset == "page-size" && o.stream.page_size == d.page_bytes) rows.push_back(o);
            }
            double v = fit_interleave(rep.params, d.page_bytes, rows);
            rep.constraints.push_back({fmt::format("interleave_factor_{}", d.page_bytes), v, {"page-size: page=" + std::to_string(d.page_bytes)}});
        }
        rep.method += "; interleave factors by golden-section search per page size";
    }
    rep.params.validate();

    if (options.simulate_residuals) {
        for (const auto& o : obs) rep.residuals.push_back({o.dataset, o.label, simulate(o, rep.params), o.measured});
        for (const auto& o : inter) rep.residuals.push_back({o.dataset, o.label, simulate(o, rep.params), o.measured});
    }
    return rep;
}

std::string CalibrationReport::residuals_csv() const {
    std::string s = "source,dataset,row,predicted,measured,ratio\n";
    auto emit = [&](const char* source, const std::vector<Residual>& v) {
        for (const auto& r : v) s += fmt::format("{},{},\"{}\",{:.9g},{:.9g},{:.6g}\n", source, r.dataset, r.row, r.predicted, r.measured, r.ratio());
    };
    emit("simulation", residuals);
    emit("surrogate", surrogate_residuals);
    return s;
}

std::string CalibrationReport::summary() const {
    std::string s = fmt::format("{}\niterations {}, cost {:.6g} -> {:.6g}\n", method, iterations, initial_cost, final_cost);
    for (const auto& c : constraints) {
        s += fmt::format("  {} = {:.6g}", c.parameter, c.value);
        if (!c.rows.empty()) {
            s += "  <- ";
            for (std::size_t i = 0; i < c.rows.size(); ++i) s += (i ? "; " : "") + c.rows[i];
        }
        s += "\n";
    }
    if (!residuals.empty()) {
        double worst = 1;
        std::string at;
        for (const auto& r : residuals) {
            double q = std::max(r.ratio(), 1 / r.ratio());
            if (q > worst) {
                worst = q;
                at = r.dataset + ": " + r.row;
            }
        }
        s += fmt::format("worst simulated ratio {:.3g}x at {}\n", worst, at);
    }
    return s;
}

}  // namespace tensim
