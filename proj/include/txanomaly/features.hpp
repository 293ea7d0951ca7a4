#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "txanomaly/contraction.hpp"
#include "txanomaly/ingest.hpp"

namespace txanomaly {

/// Wide accumulator for satoshi sums; total-supply scale sums cannot overflow it.
using Amount = unsigned __int128;

inline constexpr std::size_t kNumFeatures = 10;

/// Column order of every feature matrix and of features.csv.
enum FeatureColumn : std::size_t {
    kAvgIn = 0,
    kAvgOut,
    kTotalSent,
    kTotalReceived,
    kStdReceived,
    kStdSent,
    kNbInIn,
    kNbInOut,
    kNbOutIn,
    kNbOutOut,
};

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "avg_in",       "avg_out",  "total_sent", "total_received", "std_received",
    "std_sent",     "nb_in_in", "nb_in_out",  "nb_out_in",      "nb_out_out",
};

/// Contracted transaction graph. Users are addressed by dense index into `users` (sorted
/// ids). Per-user lists are stored CSR-style, ordered by transaction id so every per-user
/// reduction runs in a fixed order.
struct UserGraph {
    std::vector<UserId> users;

    std::vector<std::size_t> received_offsets{0};
    std::vector<Amount> received;  // per-transaction totals received
    std::vector<std::size_t> sent_offsets{0};
    std::vector<Amount> sent;  // per-transaction totals sent

    std::vector<std::uint64_t> in_degree;   // edge instances ending at the user
    std::vector<std::uint64_t> out_degree;  // edge instances leaving the user

    std::vector<std::size_t> in_offsets{0};
    std::vector<std::size_t> in_neighbors;  // distinct, ascending dense indices
    std::vector<std::size_t> out_offsets{0};
    std::vector<std::size_t> out_neighbors;

    std::uint64_t n_edge_instances = 0;

    std::size_t n_users() const noexcept { return users.size(); }
    /// Dense index of `user`; throws std::out_of_range when absent.
    std::size_t index_of(UserId user) const;

    std::span<const Amount> received_totals(std::size_t u) const {
        return {received.data() + received_offsets[u], received_offsets[u + 1] - received_offsets[u]};
    }
    std::span<const Amount> sent_totals(std::size_t u) const {
        return {sent.data() + sent_offsets[u], sent_offsets[u + 1] - sent_offsets[u]};
    }
    std::span<const std::size_t> in_neighbors_of(std::size_t u) const {
        return {in_neighbors.data() + in_offsets[u], in_offsets[u + 1] - in_offsets[u]};
    }
    std::span<const std::size_t> out_neighbors_of(std::size_t u) const {
        return {out_neighbors.data() + out_offsets[u], out_offsets[u + 1] - out_offsets[u]};
    }
};

/// For every transaction t, each (input user u, output user v) pair with u != v adds one
/// edge instance u -> v. Flows of transactions with only one side still count toward the
/// per-user amount totals.
UserGraph build_user_graph(FlowReader& inputs, FlowReader& outputs, const AddressUserMap& map);
UserGraph build_user_graph(const std::string& txin_path, const std::string& txout_path,
                           const AddressUserMap& map);

struct AmountFeatures {
    double avg_in = 0;
    double avg_out = 0;
    double total_sent = 0;
    double total_received = 0;
    double std_received = 0;
    double std_sent = 0;
};

struct NeighborhoodFeatures {
    double nb_in_in = 0;
    double nb_in_out = 0;
    double nb_out_in = 0;
    double nb_out_out = 0;
};

/// Means and population standard deviations over per-transaction totals.
AmountFeatures amount_features(const UserGraph& graph, std::size_t user);

/// Average in/out degree over the distinct in-neighbors (nb_in_*) or out-neighbors (nb_out_*).
NeighborhoodFeatures neighborhood_features(const UserGraph& graph, std::size_t user);

using FeatureValues = Eigen::Matrix<double, Eigen::Dynamic, static_cast<int>(kNumFeatures), Eigen::RowMajor>;

struct FeatureMatrix {
    std::vector<UserId> user_ids;  // ascending
    FeatureValues values;

    std::size_t rows() const noexcept { return user_ids.size(); }
};

FeatureMatrix assemble_feature_matrix(const UserGraph& graph, unsigned threads = 1);

void write_features_csv(std::ostream& out, const FeatureMatrix& features);
void write_features_csv(const std::string& path, const FeatureMatrix& features);
FeatureMatrix read_features_csv(std::istream& in, const std::string& source = "<stream>");
FeatureMatrix read_features_csv(const std::string& path);

}  // namespace txanomaly
