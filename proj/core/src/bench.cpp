// SPDX-License-Identifier: Apache-2.0
#include "tensim/bench.hpp"

#include <algorithm>
#include <array>
#include <fmt/format.h>
#include <memory>
#include <random>

#include "tensim/datasets.hpp"
#include "tensim/error.hpp"
#include "tensim/grid.hpp"

namespace tensim {

// ---- enums ----

std::string_view to_string(SyncMode m) { return m == SyncMode::PerAccess ? "per-access" : "per-row"; }
std::string_view to_string(AccessOrder o) { return o == AccessOrder::Contiguous ? "contiguous" : "column-major"; }
std::string_view to_string(Route r) { return r == Route::DirectToCB ? "direct" : "memcpy"; }

std::string_view to_string(StreamSide s) {
    switch (s) {
        case StreamSide::Read: return "read";
        case StreamSide::Write: return "write";
        case StreamSide::Both: return "both";
    }
    return "?";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& all, const char* what) {
    for (E e : all) {
        if (s == to_string(e)) return e;
    }
    throw Error(ErrorKind::InvalidConfig, fmt::format("unknown {} '{}'", what, s));
}

}  // namespace

SyncMode parse_sync_mode(std::string_view s) {
    return parse_enum(s, std::array{SyncMode::PerAccess, SyncMode::PerRow}, "sync mode");
}
AccessOrder parse_access_order(std::string_view s) {
    return parse_enum(s, std::array{AccessOrder::Contiguous, AccessOrder::ColumnMajor}, "access order");
}
Route parse_route(std::string_view s) { return parse_enum(s, std::array{Route::DirectToCB, Route::ViaLocalBufferMemcpy}, "route"); }
StreamSide parse_stream_side(std::string_view s) {
    return parse_enum(s, std::array{StreamSide::Read, StreamSide::Write, StreamSide::Both}, "stream side");
}

void StreamConfig::validate() const {
    if (width == 0 || height == 0 || element_size == 0) throw Error(ErrorKind::InvalidConfig, "stream dimensions must be positive");
    if (batch_size == 0 || row_bytes() % batch_size != 0) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("batch size {} does not divide the {}-byte row", batch_size, row_bytes()));
    }
    if (replication == 0) throw Error(ErrorKind::InvalidConfig, "replication must be >= 1");
    if (cores == 0 || cores > CoreGrid{}.worker_cores || cores > height) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("cores must be in 1..min({}, height)", CoreGrid{}.worker_cores));
    }
    if (row_bytes() > 128 * 1024) throw Error(ErrorKind::InvalidConfig, "rows longer than 128 KiB do not fit the CB");
}

// ---- stream kernels ----

namespace {

constexpr std::uint32_t kCbStream = 0;
// Rows handed from reader to writer per CB transaction; column-major order walks down these.
constexpr std::uint32_t kBlockRows = 2;

struct StreamPlan {
    StreamConfig cfg;
    DramBuffer in, out;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> rows;  // per core [begin, end)
};

using StreamPlanPtr = std::shared_ptr<const StreamPlan>;

struct SideShape {
    std::uint32_t batch;
    SyncMode sync;
    AccessOrder order;
};

SideShape shape(const StreamConfig& c, bool read) {
    bool varied = c.varied == StreamSide::Both || (c.varied == StreamSide::Read) == read;
    if (varied) return {c.batch_size, c.sync_mode, c.access_order};
    return {c.row_bytes(), SyncMode::PerRow, AccessOrder::Contiguous};
}

// (row in block, batch index) in issue order.
std::vector<std::pair<std::uint32_t, std::uint32_t>> issue_order(std::uint32_t g, std::uint32_t n, AccessOrder o) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> v;
    if (o == AccessOrder::Contiguous) {
        for (std::uint32_t i = 0; i < g; ++i) {
            for (std::uint32_t c = 0; c < n; ++c) v.push_back({i, c});
        }
    } else {
        for (std::uint32_t c = 0; c < n; ++c) {
            for (std::uint32_t i = 0; i < g; ++i) v.push_back({i, c});
        }
    }
    return v;
}

Task<> stream_reader(KernelContext& ctx, StreamPlanPtr plan) {
    const StreamConfig& c = plan->cfg;
    const auto [begin, end] = plan->rows[ctx.core_index()];
    const SideShape s = shape(c, true);
    const std::uint32_t rb = c.row_bytes();
    const std::uint32_t n = rb / s.batch;
    const std::uint32_t scratch = ctx.sram_buffer("scratch");
    const std::uint32_t local = c.route == Route::ViaLocalBufferMemcpy ? ctx.sram_buffer("local") : 0;
    auto row_addr = [&](std::uint32_t row) { return plan->in.base_address + static_cast<std::uint64_t>(row) * rb; };

    for (std::uint32_t y = begin; y < end; y += kBlockRows) {
        const std::uint32_t g = std::min(kBlockRows, end - y);
        co_await ctx.cb_reserve_back(kCbStream, g);
        const std::uint32_t wp = ctx.get_write_ptr(kCbStream);
        const std::uint32_t dst = c.route == Route::DirectToCB ? wp : local;
        std::uint32_t issued = 0;
        for (auto [i, b] : issue_order(g, n, s.order)) {
            const std::uint32_t off = b * s.batch;
            co_await ctx.noc_async_read_buffer(plan->in, row_addr(y + i) + off, dst + i * rb + off, s.batch);
            for (std::uint32_t k = 1; k < c.replication; ++k) {
                const std::uint32_t src = (y + i + c.height - k % c.height) % c.height;
                co_await ctx.noc_async_read_buffer(plan->in, row_addr(src) + off, scratch + off, s.batch);
            }
            if (s.sync == SyncMode::PerAccess || ++issued % n == 0) co_await ctx.noc_async_read_barrier();
        }
        co_await ctx.noc_async_read_barrier();
        if (c.route == Route::ViaLocalBufferMemcpy) {
            for (std::uint32_t i = 0; i < g; ++i) co_await ctx.memcpy(wp + i * rb, local + i * rb, rb);
        }
        ctx.cb_push_back(kCbStream, g);
    }
}

Task<> stream_writer(KernelContext& ctx, StreamPlanPtr plan) {
    const StreamConfig& c = plan->cfg;
    const auto [begin, end] = plan->rows[ctx.core_index()];
    const SideShape s = shape(c, false);
    const std::uint32_t rb = c.row_bytes();
    const std::uint32_t n = rb / s.batch;

    for (std::uint32_t y = begin; y < end; y += kBlockRows) {
        const std::uint32_t g = std::min(kBlockRows, end - y);
        co_await ctx.cb_wait_front(kCbStream, g);
        const std::uint32_t rp = ctx.get_read_ptr(kCbStream);
        std::uint32_t issued = 0;
        for (auto [i, b] : issue_order(g, n, s.order)) {
            const std::uint32_t off = b * s.batch;
            co_await ctx.noc_async_write_buffer(rp + i * rb + off, plan->out,
                                                plan->out.base_address + static_cast<std::uint64_t>(y + i) * rb + off, s.batch);
            if (s.sync == SyncMode::PerAccess || ++issued % n == 0) co_await ctx.noc_async_write_barrier();
        }
        co_await ctx.noc_async_write_barrier();
        ctx.cb_pop_front(kCbStream, g);
    }
}

std::vector<std::uint8_t> payload(const StreamConfig& c) {
    std::mt19937_64 rng(c.seed);
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(c.row_bytes()) * c.height);
    for (std::size_t i = 0; i < bytes.size(); i += 8) {
        std::uint64_t v = rng();
        for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j) bytes[i + j] = static_cast<std::uint8_t>(v >> (8 * j));
    }
    return bytes;
}

double finish_of(const RunReport& r, KernelRole role) {
    double t = 0;
    const std::string suffix = "." + std::string(to_string(role));
    for (const auto& c : r.cores) {
        for (const auto& k : c.kernels) {
            if (k.name.ends_with(suffix)) t = std::max(t, k.finish_s);
        }
    }
    return t;
}

}  // namespace

StreamResult run_stream(const StreamConfig& cfg, const CostParams& params) {
    cfg.validate();
    auto plan = std::make_shared<StreamPlan>();
    plan->cfg = cfg;
    DramConfig dc;
    dc.write_mode = cfg.write_mode;
    DramModel dram(dc);
    Placement placement = cfg.page_size ? Placement{Interleaved{cfg.page_size}} : Placement{SingleBank{0}};
    const std::uint64_t bytes = static_cast<std::uint64_t>(cfg.row_bytes()) * cfg.height;
    plan->in = dram.allocate(placement, bytes);
    plan->out = dram.allocate(placement, bytes);
    const auto data = payload(cfg);
    dram.load(plan->in, data);

    std::uint32_t y = 0;
    for (std::uint32_t i = 0; i < cfg.cores; ++i) {
        std::uint32_t h = cfg.height / cfg.cores + (i < cfg.height % cfg.cores ? 1 : 0);
        plan->rows.push_back({y, y + h});
        y += h;
    }

    KernelProgram prog;
    prog.cbs.push_back({kCbStream, cfg.row_bytes(), 2 * kBlockRows, KernelRole::Reader, KernelRole::Writer});
    prog.sram_buffers.push_back({"scratch", cfg.row_bytes()});
    if (cfg.route == Route::ViaLocalBufferMemcpy) prog.sram_buffers.push_back({"local", kBlockRows * cfg.row_bytes()});
    prog.reader = [plan](KernelContext& c) { return stream_reader(c, plan); };
    prog.writer = [plan](KernelContext& c) { return stream_writer(c, plan); };

    const auto workers = CoreGrid{}.workers();
    std::vector<CoreLaunch> launches;
    for (std::uint32_t i = 0; i < cfg.cores; ++i) launches.push_back({workers[i], {}});

    StreamResult res;
    res.report = launch(dram, params, prog, launches);
    res.seconds = res.report.virtual_seconds;
    res.read_seconds = finish_of(res.report, KernelRole::Reader);
    res.write_seconds = finish_of(res.report, KernelRole::Writer);
    res.faults = res.report.faults.size();
    res.bytes_moved = 0;
    for (const auto& c : res.report.cores) res.bytes_moved += c.traffic.read_bytes + c.traffic.write_bytes;
    const auto out = dram.contents(plan->out);
    res.pass_through = std::equal(out.begin(), out.end(), data.begin(), data.end());
    return res;
}

StreamEstimate estimate_stream(const StreamConfig& cfg, const CostParams& params) {
    cfg.validate();
    StreamEstimate e;
    const std::uint32_t per_core = (cfg.height + cfg.cores - 1) / cfg.cores;
    constexpr std::uint32_t kSmall = 4 * kBlockRows;
    auto finish = [&](double seconds) {
        e.energy_j = energy(params, seconds);
        e.gpt_s = seconds > 0 ? gpt_per_s(static_cast<double>(cfg.width) * cfg.height, 1, seconds) : 0;
    };
    if (per_core <= 2 * kSmall) {
        StreamResult r = run_stream(cfg, params);
        e.seconds = r.seconds;
        e.read_seconds = r.read_seconds;
        e.write_seconds = r.write_seconds;
        e.faults = r.faults;
        finish(e.seconds);
        return e;
    }
    StreamConfig c = cfg;
    c.height = kSmall * cfg.cores;
    StreamResult a = run_stream(c, params);
    c.height = 2 * kSmall * cfg.cores;
    StreamResult b = run_stream(c, params);
    const double scale = (static_cast<double>(per_core) - kSmall) / kSmall;
    e.seconds = a.seconds + scale * (b.seconds - a.seconds);
    e.read_seconds = a.read_seconds + scale * (b.read_seconds - a.read_seconds);
    e.write_seconds = a.write_seconds + scale * (b.write_seconds - a.write_seconds);
    e.faults = b.faults;
    finish(e.seconds);
    return e;
}

double run_ablation(const JacobiConfig& cfg, const AblationToggles& t, const CostParams& params) {
    JacobiConfig c = cfg;
    c.launch.read = t.read;
    c.launch.memcpy = t.memcpy;
    c.launch.compute = t.compute;
    c.launch.write = t.write;
    return estimate_jacobi(c, params).gpt_s;
}

// ---- sweeps ----

std::vector<StreamConfig> SweepGrid::cells() const {
    auto or_base = [](const auto& v, auto b) { return v.empty() ? std::vector<decltype(b)>{b} : v; };
    std::vector<StreamConfig> out;
    for (StreamSide side : or_base(varied, base.varied))
        for (std::uint32_t bs : or_base(batch_sizes, base.batch_size))
            for (SyncMode sm : or_base(sync_modes, base.sync_mode))
                for (AccessOrder ao : or_base(orders, base.access_order))
                    for (std::uint32_t r : or_base(replications, base.replication))
                        for (std::uint32_t ps : or_base(page_sizes, base.page_size))
                            for (std::uint32_t nc : or_base(cores, base.cores))
                                for (Route rt : or_base(routes, base.route)) {
                                    StreamConfig c = base;
                                    c.varied = side;
                                    c.batch_size = bs;
                                    c.sync_mode = sm;
                                    c.access_order = ao;
                                    c.replication = r;
                                    c.page_size = ps;
                                    c.cores = nc;
                                    c.route = rt;
                                    out.push_back(c);
                                }
    return out;
}

std::vector<SweepRow> sweep(const SweepGrid& grid, const CostParams& params) {
    std::vector<SweepRow> rows;
    for (const StreamConfig& c : grid.cells()) rows.push_back({c, estimate_stream(c, params), std::nullopt});
    return rows;
}

namespace {

const std::vector<std::string> kSweepColumns = {"width",       "height",      "element_size",  "varied",          "batch_size",
                                                "sync_mode",   "access_order", "replication",  "page_size",       "cores",
                                                "route",       "read_runtime_s", "write_runtime_s", "runtime_s", "gpt_s",
                                                "energy_j",    "faults"};

std::string g9(double v) { return fmt::format("{:.9g}", v); }

std::vector<std::string> sweep_cells(const SweepRow& r) {
    const StreamConfig& c = r.config;
    const StreamEstimate& e = r.estimate;
    return {std::to_string(c.width),
            std::to_string(c.height),
            std::to_string(c.element_size),
            std::string(to_string(c.varied)),
            std::to_string(c.batch_size),
            std::string(to_string(c.sync_mode)),
            std::string(to_string(c.access_order)),
            std::to_string(c.replication),
            std::to_string(c.page_size),
            std::to_string(c.cores),
            std::string(to_string(c.route)),
            g9(e.read_seconds),
            g9(e.write_seconds),
            g9(e.seconds),
            g9(e.gpt_s),
            g9(e.energy_j),
            std::to_string(e.faults)};
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = join(kSweepColumns) + "\n";
    for (const SweepRow& r : rows) out += join(sweep_cells(r)) + "\n";
    return out;
}

std::string PresetTable::csv() const {
    std::string out = join(columns) + "\n";
    for (const auto& r : rows) out += join(r) + "\n";
    return out;
}

// ---- presets ----

namespace {

struct Preset {
    const char* name;
    const char* description;
};

constexpr Preset kPresets[] = {
    {"versions", "tiled Jacobi kernel versions, 512x512, 10000 iterations, 1 core"},
    {"ablation", "double-buffered tiled kernel with read/memcpy/compute/write phases toggled"},
    {"batch-contiguous", "stream benchmark, batch size x sync mode x read/write, row-major access"},
    {"batch-noncontiguous", "stream benchmark, batch size x sync mode x read/write, column-major access"},
    {"memcpy", "stream benchmark reading into a local buffer and copying into the CB"},
    {"replication", "stream benchmark with replicated reads"},
    {"page-size", "stream benchmark, interleaving page size x replication"},
    {"core-scaling", "stream benchmark, interleaving page size x core count"},
    {"scaling", "row-chunk Jacobi kernel, 9216x1024, 5000 iterations, 1..432 cores"},
};

PresetTable stream_table(std::string name, const std::vector<SweepRow>& rows) {
    PresetTable t;
    t.name = std::move(name);
    t.columns = kSweepColumns;
    t.columns.push_back("measured_s");
    t.columns.push_back("ratio");
    for (const SweepRow& r : rows) {
        auto cells = sweep_cells(r);
        cells.push_back(r.measured_s ? g9(*r.measured_s) : "");
        cells.push_back(r.measured_s ? g9(r.estimate.seconds / *r.measured_s) : "");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::vector<SweepRow> batch_rows(const std::vector<datasets::BatchRow>& data, AccessOrder order, const CostParams& p) {
    std::vector<SweepRow> rows;
    for (StreamSide side : {StreamSide::Read, StreamSide::Write}) {
        for (SyncMode sync : {SyncMode::PerRow, SyncMode::PerAccess}) {
            for (const auto& d : data) {
                StreamConfig c;
                c.varied = side;
                c.batch_size = d.batch_bytes;
                c.sync_mode = sync;
                c.access_order = order;
                double measured = side == StreamSide::Read ? (sync == SyncMode::PerRow ? d.read_nosync_s : d.read_sync_s)
                                                        : (sync == SyncMode::PerRow ? d.write_nosync_s : d.write_sync_s);
                rows.push_back({c, estimate_stream(c, p), measured});
            }
        }
    }
    return rows;
}

JacobiConfig tiled_config(Variant v) {
    JacobiConfig c;
    c.domain.nx = c.domain.ny = datasets::kTiledDomain;
    c.iterations = datasets::kTiledIterations;
    c.variant = v;
    return c;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> v;
    for (const Preset& p : kPresets) v.emplace_back(p.name);
    return v;
}

std::string preset_description(std::string_view name) {
    for (const Preset& p : kPresets) {
        if (name == p.name) return p.description;
    }
    throw Error(ErrorKind::InvalidConfig, fmt::format("unknown preset '{}'", name));
}

PresetTable run_preset(std::string_view name, const CostParams& p) {
    preset_description(name);
    const std::string n(name);

    if (n == "versions") {
        PresetTable t{n, {"version", "gpt_s", "energy_j", "measured_gpt_s", "ratio"}, {}};
        const std::pair<const char*, Variant> map[] = {
            {"initial", Variant::Initial}, {"write_batched", Variant::WriteBatched}, {"double_buffered", Variant::DoubleBuffered}};
        for (const auto& row : datasets::versions()) {
            for (auto [key, v] : map) {
                if (row.version != key) continue;
                JacobiEstimate e = estimate_jacobi(tiled_config(v), p);
                t.rows.push_back({std::string(to_string(v)), g9(e.gpt_s), g9(e.energy_j), g9(row.gpt_s), g9(e.gpt_s / row.gpt_s)});
            }
        }
        return t;
    }
    if (n == "ablation") {
        PresetTable t{n, {"read", "memcpy", "compute", "write", "gpt_s", "measured_gpt_s", "ratio"}, {}};
        auto yn = [](bool b) { return std::string(b ? "Y" : "N"); };
        for (const auto& row : datasets::ablation()) {
            double g = run_ablation(tiled_config(Variant::DoubleBuffered), {row.read, row.memcpy, row.compute, row.write}, p);
            t.rows.push_back({yn(row.read), yn(row.memcpy), yn(row.compute), yn(row.write), g9(g), g9(row.gpt_s), g9(g / row.gpt_s)});
        }
        return t;
    }
    if (n == "batch-contiguous") return stream_table(n, batch_rows(datasets::batch_contiguous(), AccessOrder::Contiguous, p));
    if (n == "batch-noncontiguous") return stream_table(n, batch_rows(datasets::batch_noncontiguous(), AccessOrder::ColumnMajor, p));
    if (n == "memcpy") {
        StreamConfig c;
        c.route = Route::ViaLocalBufferMemcpy;
        return stream_table(n, {{c, estimate_stream(c, p), datasets::kMemcpyStreamSeconds}});
    }
    if (n == "replication") {
        std::vector<SweepRow> rows;
        for (const auto& d : datasets::replication()) {
            StreamConfig c;
            c.replication = d.replication;
            rows.push_back({c, estimate_stream(c, p), d.runtime_s});
        }
        return stream_table(n, rows);
    }
    if (n == "page-size") {
        std::vector<SweepRow> rows;
        for (const auto& d : datasets::page_size()) {
            for (std::size_t i = 0; i < datasets::kPageSizeReplication.size(); ++i) {
                StreamConfig c;
                c.page_size = d.page_bytes;
                c.replication = datasets::kPageSizeReplication[i];
                rows.push_back({c, estimate_stream(c, p), d.runtime_s[i]});
            }
        }
        return stream_table(n, rows);
    }
    if (n == "core-scaling") {
        std::vector<SweepRow> rows;
        for (const auto& d : datasets::core_scaling()) {
            for (std::size_t i = 0; i < datasets::kCoreScalingCores.size(); ++i) {
                StreamConfig c;
                c.page_size = d.page_bytes;
                c.cores = datasets::kCoreScalingCores[i];
                rows.push_back({c, estimate_stream(c, p), d.runtime_s[i]});
            }
        }
        return stream_table(n, rows);
    }
    // scaling
    PresetTable t{n,
                  {"type", "total_cores", "cores_y", "cores_x", "gpt_s", "energy_j", "measured_gpt_s", "measured_energy_j", "ratio",
                   "implied_power_w"},
                  {}};
    const double work = static_cast<double>(datasets::kScalingNx) * datasets::kScalingNy * datasets::kScalingIterations;
    for (const auto& row : datasets::scaling()) {
        const std::uint32_t cards = row.cards();
        if (cards == 0) continue;
        JacobiConfig c;
        c.domain.nx = datasets::kScalingNx;
        c.domain.ny = datasets::kScalingNy / cards;
        c.iterations = datasets::kScalingIterations;
        c.variant = Variant::Optimized;
        std::uint32_t cy = *row.cores_y / cards, cx = *row.cores_x;
        // The published 8-core row lists 4x4; eight cores allow 4 columns by 2 rows.
        if (cx * cy != row.total_cores / cards) cy = row.total_cores / cards / cx;
        c.layout = CoreLayout{cx, cy};
        c.cores = cx * cy;
        JacobiEstimate e = estimate_jacobi(c, p);
        const double seconds = e.seconds;  // cards run their partitions concurrently
        const double gpt = gpt_per_s(work, 1, seconds);
        const double joules = cards * energy(p, seconds);
        const double implied_w = row.energy_j * row.gpt_s * 1e9 / work / cards;
        t.rows.push_back({row.type, std::to_string(row.total_cores), std::to_string(*row.cores_y), std::to_string(cx), g9(gpt),
                          g9(joules), g9(row.gpt_s), g9(row.energy_j), g9(gpt / row.gpt_s), g9(implied_w)});
    }
    return t;
}

}  // namespace tensim
