// SPDX-License-Identifier: Apache-2.0
#include "tensim/datasets.hpp"

#include <sstream>
#include <string_view>

#include "embedded_data.hpp"
#include "tensim/error.hpp"

namespace tensim::datasets {

namespace {

// Header line skipped; fields are plain comma-separated values without quoting.
std::vector<std::vector<std::string>> rows(std::string_view csv) {
    std::vector<std::vector<std::string>> out;
    std::istringstream in{std::string(csv)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        out.push_back(std::move(f));
    }
    return out;
}

double num(const std::string& s) { return std::stod(s); }
std::uint32_t u32(const std::string& s) { return static_cast<std::uint32_t>(std::stoul(s)); }
bool yes(const std::string& s) { return s == "Y"; }

template <typename Row, typename F>
std::vector<Row> parse(std::string_view csv, std::size_t fields, F&& make) {
    std::vector<Row> out;
    for (const auto& f : rows(csv)) {
        if (f.size() != fields) throw Error(ErrorKind::InvalidConfig, "malformed embedded dataset row");
        out.push_back(make(f));
    }
    return out;
}

std::vector<BatchRow> batch(std::string_view csv) {
    return parse<BatchRow>(csv, 6, [](const auto& f) {
        return BatchRow{u32(f[0]), u32(f[1]), num(f[2]), num(f[3]), num(f[4]), num(f[5])};
    });
}

}  // namespace

std::uint32_t ScalingRow::cards() const {
    if (type == "e150") return 1;
    if (type.rfind("e150x", 0) == 0) return u32(type.substr(5));
    return 0;
}

const std::vector<VersionRow>& versions() {
    static const auto v = parse<VersionRow>(embedded::kSingleCoreVersionsCsv, 2, [](const auto& f) {
        return VersionRow{f[0], num(f[1])};
    });
    return v;
}

const std::vector<AblationRow>& ablation() {
    static const auto v = parse<AblationRow>(embedded::kAblationCsv, 5, [](const auto& f) {
        return AblationRow{yes(f[0]), yes(f[1]), yes(f[2]), yes(f[3]), num(f[4])};
    });
    return v;
}

const std::vector<BatchRow>& batch_contiguous() {
    static const auto v = batch(embedded::kStreamContiguousCsv);
    return v;
}

const std::vector<BatchRow>& batch_noncontiguous() {
    static const auto v = batch(embedded::kStreamNoncontiguousCsv);
    return v;
}

const std::vector<ReplicationRow>& replication() {
    static const auto v = parse<ReplicationRow>(embedded::kStreamReplicationCsv, 2, [](const auto& f) {
        return ReplicationRow{u32(f[0]), num(f[1])};
    });
    return v;
}

const std::vector<PageSizeRow>& page_size() {
    static const auto v = parse<PageSizeRow>(embedded::kStreamPageSizeCsv, 5, [](const auto& f) {
        return PageSizeRow{u32(f[0]), {num(f[1]), num(f[2]), num(f[3]), num(f[4])}};
    });
    return v;
}

const std::vector<CoreScalingRow>& core_scaling() {
    static const auto v = parse<CoreScalingRow>(embedded::kStreamCoreScalingCsv, 5, [](const auto& f) {
        return CoreScalingRow{u32(f[0]), {num(f[1]), num(f[2]), num(f[3]), num(f[4])}};
    });
    return v;
}

const std::vector<ScalingRow>& scaling() {
    static const auto v = parse<ScalingRow>(embedded::kScalingCsv, 6, [](const auto& f) {
        auto opt = [](const std::string& s) { return s.empty() ? std::nullopt : std::optional<std::uint32_t>(u32(s)); };
        return ScalingRow{f[0], u32(f[1]), opt(f[2]), opt(f[3]), num(f[4]), num(f[5])};
    });
    return v;
}

}  // namespace tensim::datasets
