// SPDX-License-Identifier: Apache-2.0
#include "tensim/cost.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "embedded_data.hpp"
#include "tensim/error.hpp"

namespace tensim {

namespace {

constexpr const char* kFactorPrefix = "interleave_factor_";

struct Field {
    const char* name;
    double CostParams::*member;
};

constexpr Field kFields[] = {
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
    {"power_watts", &CostParams::power_watts},
};

}  // namespace

double CostParams::interleave(std::uint32_t page_size) const {
    if (page_size == 0 || interleave_factor.empty()) return 1.0;
    auto hi = interleave_factor.lower_bound(page_size);
    if (hi != interleave_factor.end() && hi->first == page_size) return hi->second;
    if (hi == interleave_factor.begin()) return hi->second;
    if (hi == interleave_factor.end()) return std::prev(hi)->second;
    auto lo = std::prev(hi);
    double t = (std::log2(page_size) - std::log2(lo->first)) / (std::log2(hi->first) - std::log2(lo->first));
    return std::exp(std::log(lo->second) * (1 - t) + std::log(hi->second) * t);
}

void CostParams::validate() const {
    for (const Field& f : kFields) {
        double v = this->*f.member;
        if (!std::isfinite(v) || v < 0) throw Error(ErrorKind::InvalidConfig, std::string(f.name) + " must be finite and >= 0");
    }
    if (aggregate_bw_bytes_per_s <= 0) throw Error(ErrorKind::InvalidConfig, "aggregate_bw_bytes_per_s must be > 0");
    for (auto [page, f] : interleave_factor) {
        if (!(f > 0) || !std::isfinite(f)) throw Error(ErrorKind::InvalidConfig, "interleave factor must be > 0");
    }
}

double predict_transaction(const CostParams& p, TxKind kind, std::uint64_t length, bool contiguous, bool synced) {
    if (length == 0) throw Error(ErrorKind::InvalidConfig, "zero-length transaction");
    double t = p.req_ns(kind) + static_cast<double>(length) * p.byte_ns(kind);
    if (synced) t += p.sync_roundtrip_ns;
    if (!contiguous) t += p.noncontig_req_ns;
    return t;
}

double energy(const CostParams& p, double virtual_seconds) { return p.power_watts * virtual_seconds; }

double gpt_per_s(double points, double iterations, double virtual_seconds) {
    if (!(virtual_seconds > 0)) throw Error(ErrorKind::InvalidConfig, "gpt_per_s needs a positive runtime");
    return points * iterations / virtual_seconds / 1e9;
}

CostParams parse_params(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::InvalidConfig, std::string("params: ") + e.what());
    }
    CostParams p;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) throw Error(ErrorKind::InvalidConfig, "params file must be flat, found section " + key);
        double v = 0;
        try {
            v = std::stod(node.data());
        } catch (const std::exception&) {
            throw Error(ErrorKind::InvalidConfig, "params: bad number for " + key);
        }
        bool known = false;
        for (const Field& f : kFields) {
            if (key == f.name) {
                p.*f.member = v;
                known = true;
            }
        }
        if (!known && key.rfind(kFactorPrefix, 0) == 0) {
            p.interleave_factor[static_cast<std::uint32_t>(std::stoul(key.substr(std::string(kFactorPrefix).size())))] = v;
            known = true;
        }
        if (!known) throw Error(ErrorKind::InvalidConfig, "params: unknown key " + key);
    }
    p.validate();
    return p;
}

CostParams load_params(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot open params file " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_params(ss.str());
}

std::string format_params(const CostParams& p, const std::string& header) {
    std::string out;
    std::istringstream hs(header);
    for (std::string line; std::getline(hs, line);) out += "# " + line + "\n";
    for (const Field& f : kFields) out += fmt::format("{} = {:.9g}\n", f.name, p.*f.member);
    for (auto [page, v] : p.interleave_factor) out += fmt::format("{}{} = {:.9g}\n", kFactorPrefix, page, v);
    return out;
}

void save_params(const CostParams& p, const std::filesystem::path& path, const std::string& header) {
    std::ofstream f(path);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
    f << format_params(p, header);
}

const CostParams& calibrated_params() {
    static const CostParams p = parse_params(std::string(embedded::kCalibratedParams));
    return p;
}

}  // namespace tensim
