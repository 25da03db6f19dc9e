// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "tensim/bench.hpp"
#include "tensim/calibrate.hpp"
#include "tensim/cost.hpp"
#include "tensim/datasets.hpp"
#include "tensim/error.hpp"
#include "tensim/jacobi.hpp"

namespace tensim::cli {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// Raised for anything the user can fix by changing arguments or config files.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join(const std::vector<std::string>& v, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

template <typename T>
T to_number(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        T out;
        if constexpr (std::is_floating_point_v<T>) {
            out = static_cast<T>(std::stod(v, &used));
        } else {
            long long x = std::stoll(v, &used);
            if (x < 0) throw std::invalid_argument("negative");
            out = static_cast<T>(x);
        }
        if (used != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw UsageError(fmt::format("{}: '{}' is not a valid number", key, v));
    }
}

std::string placement_string(const Placement& p) {
    if (const auto* s = std::get_if<SingleBank>(&p)) return fmt::format("single:{}", s->bank);
    return fmt::format("interleaved:{}", std::get<Interleaved>(p).page_size);
}

Placement parse_placement(const std::string& s) {
    auto colon = s.find(':');
    std::string kind = s.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);
    if (kind == "single") return SingleBank{arg.empty() ? 0u : to_number<std::uint32_t>("placement", arg)};
    if (kind == "interleaved") return Interleaved{arg.empty() ? 16384u : to_number<std::uint32_t>("placement", arg)};
    throw UsageError(fmt::format("placement: expected single[:bank] or interleaved[:page], got '{}'", s));
}

// ---- resolved run configuration ----

struct Manifest {
    std::string subcommand;
    std::string config_path;
    std::string params_path;
    std::string out_dir = ".";
    std::uint64_t seed = 42;

    JacobiConfig jacobi;
    // Phases of each ablation row; empty means the published rows.
    std::vector<AblationToggles> ablations;
    CostParams params;
    std::map<std::string, std::string> cost_overrides;

    std::string preset;
    SweepGrid sweep;
};

Manifest defaults() {
    Manifest m;
    m.jacobi.domain.nx = m.jacobi.domain.ny = 64;
    m.jacobi.iterations = 10;
    m.jacobi.variant = Variant::Optimized;
    return m;
}

const std::set<std::string>& known_keys(const std::string& section) {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"domain", {"nx", "ny", "iterations", "left", "right", "top", "bottom", "initial"}},
        {"kernel", {"variant", "cores", "cores_x", "cores_y", "read_path", "layout", "write_mode", "placement", "phases"}},
        {"bench",
         {"preset", "width", "height", "element_size", "varied", "batch_size", "sync_mode", "access_order", "replication", "page_size",
          "cores", "route", "write_mode"}},
        {"cost", {}},
    };
    auto it = keys.find(section);
    if (it == keys.end()) throw UsageError(fmt::format("config: unknown section [{}]", section));
    return it->second;
}

AblationToggles parse_phases(const std::string& s) {
    AblationToggles t{false, false, false, false};
    if (s == "none") return t;
    if (s == "all") return {};
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, '+')) {
        if (item == "read") t.read = true;
        else if (item == "memcpy") t.memcpy = true;
        else if (item == "compute") t.compute = true;
        else if (item == "write") t.write = true;
        else throw UsageError(fmt::format("phases: unknown phase '{}' (read, memcpy, compute, write, none, all)", item));
    }
    return t;
}

std::string phases_string(const AblationToggles& t) {
    std::vector<std::string> v;
    if (t.read) v.push_back("read");
    if (t.memcpy) v.push_back("memcpy");
    if (t.compute) v.push_back("compute");
    if (t.write) v.push_back("write");
    return v.empty() ? "none" : join(v, "+");
}

template <typename T, typename F>
std::vector<T> parse_each(const std::string& v, F f) {
    std::vector<T> out;
    for (const auto& s : split_list(v)) out.push_back(f(s));
    return out;
}

void apply_key(Manifest& m, const std::string& section, const std::string& key, const std::string& v) {
    const std::string k = section + "." + key;
    Domain& d = m.jacobi.domain;
    JacobiConfig& j = m.jacobi;
    SweepGrid& g = m.sweep;
    auto u32 = [&](const std::string& s) { return to_number<std::uint32_t>(k, s); };
    auto f32 = [&](const std::string& s) { return to_number<float>(k, s); };
    if (section == "cost") {
        m.cost_overrides[key] = v;
        return;
    }
    if (!known_keys(section).contains(key)) throw UsageError(fmt::format("config: unknown key {}", k));
    if (section == "domain") {
        if (key == "nx") d.nx = u32(v);
        else if (key == "ny") d.ny = u32(v);
        else if (key == "iterations") j.iterations = u32(v);
        else if (key == "left") d.boundary.left = f32(v);
        else if (key == "right") d.boundary.right = f32(v);
        else if (key == "top") d.boundary.top = f32(v);
        else if (key == "bottom") d.boundary.bottom = f32(v);
        else if (key == "initial") d.initial = f32(v);
    } else if (section == "kernel") {
        if (key == "variant") j.variant = parse_variant(v);
        else if (key == "cores") j.cores = u32(v);
        else if (key == "cores_x") j.layout = CoreLayout{u32(v), j.layout ? j.layout->cores_y : 1};
        else if (key == "cores_y") j.layout = CoreLayout{j.layout ? j.layout->cores_x : 1, u32(v)};
        else if (key == "read_path") {
            if (v != "aligned" && v != "naive") throw UsageError(k + ": expected aligned or naive");
            j.read_path = v == "aligned" ? ReadPath::Aligned : ReadPath::Naive;
        } else if (key == "layout") {
            if (v != "padded" && v != "unpadded") throw UsageError(k + ": expected padded or unpadded");
            j.layout_kind = v == "padded" ? LayoutKind::Padded : LayoutKind::Unpadded;
        } else if (key == "write_mode") {
            if (v != "strict" && v != "permissive") throw UsageError(k + ": expected strict or permissive");
            j.write_mode = v == "strict" ? WriteMode::Strict : WriteMode::PermissiveCorrupting;
        } else if (key == "placement") j.placement = parse_placement(v);
        else if (key == "phases") m.ablations = parse_each<AblationToggles>(v, parse_phases);
    } else if (section == "bench") {
        StreamConfig& b = g.base;
        if (key == "preset") m.preset = v;
        else if (key == "width") b.width = u32(v);
        else if (key == "height") b.height = u32(v);
        else if (key == "element_size") b.element_size = u32(v);
        else if (key == "varied") g.varied = parse_each<StreamSide>(v, [](const std::string& s) { return parse_stream_side(s); });
        else if (key == "batch_size") g.batch_sizes = parse_each<std::uint32_t>(v, u32);
        else if (key == "sync_mode") g.sync_modes = parse_each<SyncMode>(v, [](const std::string& s) { return parse_sync_mode(s); });
        else if (key == "access_order") g.orders = parse_each<AccessOrder>(v, [](const std::string& s) { return parse_access_order(s); });
        else if (key == "replication") g.replications = parse_each<std::uint32_t>(v, u32);
        else if (key == "page_size") g.page_sizes = parse_each<std::uint32_t>(v, u32);
        else if (key == "cores") g.cores = parse_each<std::uint32_t>(v, u32);
        else if (key == "route") g.routes = parse_each<Route>(v, [](const std::string& s) { return parse_route(s); });
        else if (key == "write_mode") {
            if (v != "strict" && v != "permissive") throw UsageError(k + ": expected strict or permissive");
            b.write_mode = v == "strict" ? WriteMode::Strict : WriteMode::PermissiveCorrupting;
        }
    }
}

void load_config(Manifest& m, const std::string& path) {
    if (!fs::is_regular_file(path)) throw UsageError(fmt::format("config file '{}' not found", path));
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(path, tree);
    } catch (const pt::ini_parser_error& e) {
        throw UsageError(fmt::format("config: {}", e.what()));
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw UsageError(fmt::format("config: key '{}' outside a section", section));
        for (const auto& [key, value] : body) apply_key(m, section, key, value.get_value<std::string>());
    }
}

void resolve_params(Manifest& m) {
    CostParams base;
    if (m.params_path.empty()) {
        base = calibrated_params();
    } else {
        if (!fs::is_regular_file(m.params_path)) throw UsageError(fmt::format("params file '{}' not found", m.params_path));
        base = load_params(m.params_path);
    }
    // Drop overridden keys from the formatted base, then append the overrides.
    std::istringstream lines(format_params(base));
    std::string text, line;
    while (std::getline(lines, line)) {
        const std::string key = line.substr(0, line.find_first_of(" ="));
        if (!m.cost_overrides.contains(key)) text += line + "\n";
    }
    for (const auto& [k, v] : m.cost_overrides) text += k + " = " + v + "\n";
    m.params = parse_params(text);
}

std::string manifest_ini(const Manifest& m) {
    const JacobiConfig& j = m.jacobi;
    const Domain& d = j.domain;
    std::string s;
    s += fmt::format("# tensim {}\n[run]\nconfig = {}\nparams = {}\nout = {}\nseed = {}\n", m.subcommand, m.config_path,
                     m.params_path.empty() ? "<calibrated>" : m.params_path, m.out_dir, m.seed);
    s += fmt::format("\n[domain]\nnx = {}\nny = {}\niterations = {}\nleft = {}\nright = {}\ntop = {}\nbottom = {}\ninitial = {}\n", d.nx,
                     d.ny, j.iterations, d.boundary.left, d.boundary.right, d.boundary.top, d.boundary.bottom, d.initial);
    s += fmt::format("\n[kernel]\nvariant = {}\ncores = {}\n", to_string(j.variant), j.cores);
    if (j.layout) s += fmt::format("cores_x = {}\ncores_y = {}\n", j.layout->cores_x, j.layout->cores_y);
    s += fmt::format("read_path = {}\nlayout = {}\nwrite_mode = {}\n", j.read_path == ReadPath::Aligned ? "aligned" : "naive",
                     j.layout_kind == LayoutKind::Padded ? "padded" : "unpadded",
                     j.write_mode == WriteMode::Strict ? "strict" : "permissive");
    if (j.placement) s += fmt::format("placement = {}\n", placement_string(*j.placement));
    if (!m.ablations.empty()) {
        std::vector<std::string> v;
        for (const auto& t : m.ablations) v.push_back(phases_string(t));
        s += "phases = " + join(v) + "\n";
    }
    const SweepGrid& g = m.sweep;
    auto list = [](const auto& xs, auto f) {
        std::vector<std::string> v;
        for (const auto& x : xs) v.push_back(f(x));
        return join(v);
    };
    auto num = [](auto x) { return std::to_string(x); };
    auto name = [](auto x) { return std::string(to_string(x)); };
    s += fmt::format("\n[bench]\npreset = {}\nwidth = {}\nheight = {}\nelement_size = {}\n", m.preset, g.base.width, g.base.height,
                     g.base.element_size);
    if (!g.varied.empty()) s += "varied = " + list(g.varied, name) + "\n";
    if (!g.batch_sizes.empty()) s += "batch_size = " + list(g.batch_sizes, num) + "\n";
    if (!g.sync_modes.empty()) s += "sync_mode = " + list(g.sync_modes, name) + "\n";
    if (!g.orders.empty()) s += "access_order = " + list(g.orders, name) + "\n";
    if (!g.replications.empty()) s += "replication = " + list(g.replications, num) + "\n";
    if (!g.page_sizes.empty()) s += "page_size = " + list(g.page_sizes, num) + "\n";
    if (!g.cores.empty()) s += "cores = " + list(g.cores, num) + "\n";
    if (!g.routes.empty()) s += "route = " + list(g.routes, name) + "\n";
    s += fmt::format("write_mode = {}\n", g.base.write_mode == WriteMode::Strict ? "strict" : "permissive");
    s += "\n[cost]\n";
    std::string p = format_params(m.params);
    s += p;
    return s;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    f << text;
    if (!f) throw Error(ErrorKind::Io, fmt::format("write to '{}' failed", path.string()));
}

fs::path prepare_out(const Manifest& m) {
    fs::path dir(m.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw UsageError(fmt::format("output directory '{}' cannot be created", m.out_dir));
    return dir;
}

// ---- subcommands ----

int cmd_solve(const Manifest& m, bool estimate, bool csv, std::ostream& out) {
    const fs::path dir = prepare_out(m);
    const JacobiConfig& c = m.jacobi;
    if (estimate) {
        JacobiEstimate e = estimate_jacobi(c, m.params);
        nlohmann::ordered_json j;
        j["estimated"] = true;
        j["virtual_seconds"] = e.seconds;
        j["energy_joules"] = e.energy_j;
        j["gpt_s"] = e.gpt_s;
        j["cores_x"] = e.layout.cores_x;
        j["cores_y"] = e.layout.cores_y;
        j["simulated_iterations"] = {e.simulated_iterations_a, e.simulated_iterations_b};
        write_file(dir / "report.json", j.dump(2) + "\n");
        out << fmt::format("GPt/s={:.6g}, energy_J={:.6g}\n", e.gpt_s, e.energy_j);
        return kOk;
    }
    JacobiResult r = run_jacobi(c, m.params);
    write_grid(r.grid, c.iterations, dir / "grid.bin");
    if (csv) write_grid_csv(r.grid, dir / "grid.csv");
    write_file(dir / "report.json", r.report.to_json() + "\n");
    if (!r.report.faults.empty()) out << fmt::format("faults={}\n", r.report.faults.size());
    out << fmt::format("GPt/s={:.6g}, energy_J={:.6g}\n", r.gpt_s, r.energy_j);
    return kOk;
}

int cmd_bench(const Manifest& m, std::ostream& out) {
    const fs::path dir = prepare_out(m);
    std::string name, csv;
    if (!m.preset.empty()) {
        name = m.preset;
        csv = run_preset(m.preset, m.params).csv();
    } else {
        name = "sweep";
        SweepGrid g = m.sweep;
        g.base.seed = m.seed;
        csv = sweep_csv(sweep(g, m.params));
    }
    write_file(dir / ("bench_" + name + ".csv"), csv);
    out << csv;
    return kOk;
}

std::string yn(bool b) { return b ? "Y" : "N"; }

bool published_geometry(const JacobiConfig& c) {
    return c.domain.nx == datasets::kTiledDomain && c.domain.ny == datasets::kTiledDomain && c.iterations == datasets::kTiledIterations &&
           c.variant == Variant::DoubleBuffered && c.cores == 1 && !c.layout;
}

int cmd_ablate(const Manifest& m, std::ostream& out) {
    const fs::path dir = prepare_out(m);
    std::vector<AblationToggles> rows = m.ablations;
    if (rows.empty()) {
        for (const auto& d : datasets::ablation()) rows.push_back({d.read, d.memcpy, d.compute, d.write});
    }
    const bool compare = published_geometry(m.jacobi);
    std::string csv = "read,memcpy,compute,write,gpt_s,measured_gpt_s,ratio\n";
    for (const auto& t : rows) {
        const double g = run_ablation(m.jacobi, t, m.params);
        std::optional<double> measured;
        for (const auto& d : datasets::ablation()) {
            if (compare && d.read == t.read && d.memcpy == t.memcpy && d.compute == t.compute && d.write == t.write) measured = d.gpt_s;
        }
        csv += fmt::format("{},{},{},{},{:.9g},{},{}\n", yn(t.read), yn(t.memcpy), yn(t.compute), yn(t.write), g,
                           measured ? fmt::format("{:.9g}", *measured) : "", measured ? fmt::format("{:.9g}", g / *measured) : "");
    }
    write_file(dir / "ablation.csv", csv);
    out << csv;
    return kOk;
}

int cmd_calibrate(const Manifest& m, bool fit_interleave, bool simulate, std::ostream& out) {
    const fs::path dir = prepare_out(m);
    CalibrationOptions o;
    o.fit_interleave = fit_interleave;
    o.simulate_residuals = simulate;
    if (!m.params_path.empty() || !m.cost_overrides.empty()) o.start = m.params;
    CalibrationReport rep = calibrate(o);
    rep.params.power_watts = m.params.power_watts;
    save_params(rep.params, dir / "calibrated_params.txt", "fitted by `tensim calibrate`");
    write_file(dir / "calibration_residuals.csv", rep.residuals_csv());
    out << rep.summary();
    return kOk;
}

// Power implied by each published accelerator row: energy * rate / work, per card.
int cmd_report(const Manifest& m, const std::string& input, std::ostream& out) {
    const fs::path dir = prepare_out(m);
    if (!input.empty()) {
        std::ifstream f(input);
        if (!f) throw UsageError(fmt::format("report input '{}' not found", input));
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(fmt::format("report input: {}", e.what()));
        }
        out << fmt::format("virtual_seconds={} energy_J={}\n", j.value("virtual_seconds", 0.0), j.value("energy_joules", 0.0));
        if (j.contains("transactions")) out << "transactions=" << j["transactions"].dump() << "\n";
        if (j.contains("faults")) out << "faults=" << j["faults"].size() << "\n";
    }
    const double work = static_cast<double>(datasets::kScalingNx) * datasets::kScalingNy * datasets::kScalingIterations;
    std::string csv = "type,total_cores,gpt_s,energy_j,cards,board_power_w,power_per_card_w,within_45_56\n";
    bool all = true;
    for (const auto& r : datasets::scaling()) {
        const std::uint32_t cards = r.cards();
        if (cards == 0) continue;
        const double watts = r.energy_j * r.gpt_s * 1e9 / work;
        const double per_card = watts / cards;
        const bool ok = per_card >= 45 && per_card <= 56;
        all = all && ok;
        csv += fmt::format("{},{},{},{},{},{:.4g},{:.4g},{}\n", r.type, r.total_cores, r.gpt_s, r.energy_j, cards, watts, per_card,
                           ok ? "yes" : "no");
    }
    write_file(dir / "energy_audit.csv", csv);
    out << csv;
    out << fmt::format("energy audit: {}\n", all ? "every accelerator row implies 45-56 W per card" : "some rows fall outside 45-56 W");
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete-event simulator of a Tensix-style accelerator running Jacobi and streaming kernels", "tensim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tensim 0.1.0");

    std::string config, params, out_dir = ".";
    std::uint64_t seed = 42;
    bool dry_run = false;
    auto common = [&](CLI::App* s) {
        s->add_option("-c,--config", config, "Config file with [domain], [kernel], [cost] and [bench] sections");
        s->add_option("-p,--params", params, "Cost parameter file (default: the calibrated parameters)");
        s->add_option("-o,--out", out_dir, "Output directory")->capture_default_str();
        s->add_option("--seed", seed, "Seed for generated payloads")->capture_default_str();
        s->add_flag("--dry-run", dry_run, "Print the resolved configuration and exit");
    };

    std::optional<std::uint32_t> nx, ny, iters, cores;
    std::optional<std::string> variant;
    bool estimate = false, csv = false;
    CLI::App* solve = app.add_subcommand("solve", "Run a Jacobi solve and write the grid, report and summary line");
    common(solve);
    solve->add_option("--nx", nx, "Interior width");
    solve->add_option("--ny", ny, "Interior height");
    solve->add_option("-n,--iterations", iters, "Jacobi iterations");
    solve->add_option("--variant", variant, "reference, initial, write-batched, double-buffered or optimized");
    solve->add_option("--cores", cores, "Worker cores (1..108)");
    solve->add_flag("--estimate", estimate, "Extrapolate timing from short runs instead of simulating every iteration");
    solve->add_flag("--csv", csv, "Also write grid.csv");

    std::optional<std::string> preset;
    bool list_presets = false;
    CLI::App* bench = app.add_subcommand("bench", "Run a streaming benchmark preset or the [bench] sweep");
    common(bench);
    bench->add_option("--preset", preset, "Named preset (see --list)");
    bench->add_flag("--list", list_presets, "List presets and exit");

    std::vector<std::string> phases;
    CLI::App* ablate = app.add_subcommand("ablate", "Time a Jacobi kernel with phases disabled");
    common(ablate);
    ablate->add_option("--phases", phases, "Comma list of enabled phases per row, e.g. none,read+memcpy,all (default: the published rows)")->delimiter(',');

    bool no_interleave = false, no_simulate = false;
    CLI::App* cal = app.add_subcommand("calibrate", "Fit the cost parameters and write them with a residual report");
    common(cal);
    cal->add_flag("--no-interleave", no_interleave, "Keep interleave factors out of the fit");
    cal->add_flag("--no-simulate", no_simulate, "Skip the full-simulation residuals");

    std::string input;
    CLI::App* report = app.add_subcommand("report", "Energy audit of the published accelerator rows; optionally summarise a run report");
    common(report);
    report->add_option("--input", input, "RunReport JSON from solve");

    std::vector<std::string> argv_store{"tensim"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << "tensim 0.1.0\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "tensim: " << e.what() << "\n";
        return kUsageError;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == bench && list_presets) {
            for (const auto& n : preset_names()) out << fmt::format("{:<20} {}\n", n, preset_description(n));
            return kOk;
        }
        Manifest m = defaults();
        m.subcommand = sub->get_name();
        m.config_path = config;
        m.params_path = params;
        m.out_dir = out_dir;
        m.seed = seed;
        if (sub == ablate) {
            m.jacobi.domain.nx = m.jacobi.domain.ny = datasets::kTiledDomain;
            m.jacobi.iterations = datasets::kTiledIterations;
            m.jacobi.variant = Variant::DoubleBuffered;
        }
        if (!config.empty()) load_config(m, config);
        if (nx) m.jacobi.domain.nx = *nx;
        if (ny) m.jacobi.domain.ny = *ny;
        if (iters) m.jacobi.iterations = *iters;
        if (variant) m.jacobi.variant = parse_variant(*variant);
        if (cores) m.jacobi.cores = *cores;
        if (preset) m.preset = *preset;
        if (!phases.empty()) {
            m.ablations.clear();
            for (const auto& p : phases) m.ablations.push_back(parse_phases(p));
        }
        if (!m.preset.empty()) preset_description(m.preset);
        m.sweep.base.seed = m.seed;
        m.sweep.base.validate();
        resolve_params(m);

        if (dry_run) {
            out << manifest_ini(m);
            return kOk;
        }
        if (sub == solve) return cmd_solve(m, estimate, csv, out);
        if (sub == bench) return cmd_bench(m, out);
        if (sub == ablate) return cmd_ablate(m, out);
        if (sub == cal) return cmd_calibrate(m, !no_interleave, !no_simulate, out);
        return cmd_report(m, input, out);
    } catch (const UsageError& e) {
        err << "tensim: " << e.what() << "\n";
        return kUsageError;
    } catch (const Error& e) {
        err << "tensim: " << e.what() << "\n";
        const bool config_error = e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::IndivisibleDomain ||
                                  e.kind() == ErrorKind::InvalidPageSize;
        return config_error ? kUsageError : kSimulatorError;
    } catch (const std::exception& e) {
        err << "tensim: " << e.what() << "\n";
        return kSimulatorError;
    }
}

}  // namespace tensim::cli
