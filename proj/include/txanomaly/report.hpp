#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "txanomaly/cluster.hpp"
#include "txanomaly/contraction.hpp"
#include "txanomaly/ingest.hpp"

namespace txanomaly {

struct ClusterSummary {
    std::size_t label = 0;
    std::size_t size = 0;
    double mean_distance = 0;
    double max_distance = 0;
    double share = 0;

    friend bool operator==(const ClusterSummary&, const ClusterSummary&) = default;
};

/// One summary per label 0..k, empty clusters included.
std::vector<ClusterSummary> summarize(std::span<const std::size_t> labels,
                                      std::span<const double> distances, std::size_t k);

struct TheftMatch {
    std::uint64_t case_id = 0;
    std::string case_name;
    AddrId addr_id = 0;
    UserId user_id = 0;
    std::optional<std::size_t> label;  // empty: the user is absent from the clustered data
    bool flagged = false;

    bool absent() const noexcept { return !label.has_value(); }
    friend bool operator==(const TheftMatch&, const TheftMatch&) = default;
};

struct MatchCounts {
    std::size_t flagged_users = 0;
    std::size_t flagged_addresses = 0;
    std::size_t flagged_cases = 0;
    std::size_t matched_entries = 0;
    std::size_t absent_entries = 0;

    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct CatalogMatch {
    std::vector<TheftMatch> matches;  // catalog order, one per entry
    MatchCounts counts;
};

/// Resolves each catalog address to its user and the user's label. `user_ids` must be
/// ascending and aligned with `labels`.
CatalogMatch match_catalog(const TheftCatalog& catalog, const AddressUserMap& map,
                           std::span<const UserId> user_ids, std::span<const std::size_t> labels,
                           const std::set<std::size_t>& flag_labels = {0});

/// Recomputes the aggregate counts from match rows.
MatchCounts count_matches(std::span<const TheftMatch> matches);

struct StageCounts {
    std::uint64_t addresses_before_wipe = 0;
    std::uint64_t addresses_after_wipe = 0;
    std::uint64_t users_after_contraction = 0;

    friend bool operator==(const StageCounts&, const StageCounts&) = default;
};

struct ReportConfig {
    std::size_t k = 0;
    double alpha = 0;
    std::size_t n_starts = 0;
    std::size_t max_iter = 0;
    double tol = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> flag_labels;

    friend bool operator==(const ReportConfig&, const ReportConfig&) = default;
};

struct AnomalyReport {
    ReportConfig config;
    StageCounts stages;
    double objective = 0;
    std::vector<ClusterSummary> summaries;
    std::vector<TheftMatch> matches;
    MatchCounts counts;

    friend bool operator==(const AnomalyReport&, const AnomalyReport&) = default;
};

std::string report_to_json(const AnomalyReport& report);
AnomalyReport report_from_json(const std::string& text);

/// `user_id,label,distance` rows, one per clustered user.
std::string dispersion_csv(std::span<const UserId> user_ids, std::span<const std::size_t> labels,
                           std::span<const double> distances);
/// `case_id,case_name,addr_id,user_id,label,flagged`; absent users carry label `absent`.
std::string matches_csv(std::span<const TheftMatch> matches);

/// Writes report.json, dispersion.csv and matches.csv into `out_dir`; returns the paths written.
std::vector<std::string> emit_report(const AnomalyReport& report, std::span<const UserId> user_ids,
                                     std::span<const std::size_t> labels,
                                     std::span<const double> distances, const std::string& out_dir);

}  // namespace txanomaly
