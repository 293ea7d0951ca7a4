#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "txanomaly/contraction.hpp"
#include "txanomaly/ingest.hpp"

namespace txanomaly {

/// Synthetic transaction data with injected anomalous users. Every transaction of a user
/// co-spends all of that user's addresses, so common-input ownership recovers the true
/// ownership exactly. Anomalous users move `anomaly_scale` times the background volume and
/// split it evenly across their addresses.
struct SynthConfig {
    std::uint64_t seed = 42;
    std::size_t n_background_users = 1000;
    std::size_t n_anomalous_users = 10;
    std::size_t min_txs_per_user = 4;
    std::size_t max_txs_per_user = 12;
    Satoshi min_amount = 1'000'000;   // log-uniform lower bound
    Satoshi max_amount = 10'000'000;  // log-uniform upper bound
    double anomaly_scale = 100.0;
    std::size_t min_addresses_per_anomalous = 4;
    std::size_t max_addresses_per_anomalous = 4;
    std::size_t min_addresses_per_background = 1;
    std::size_t max_addresses_per_background = 1;
    std::size_t max_recipients = 2;
};

/// Throws ConfigError for infeasible configurations.
void validate_synth_config(const SynthConfig& cfg);

struct GroundTruth {
    std::vector<UserId> anomalous_users;           // ascending
    std::map<UserId, std::vector<AddrId>> owners;  // user -> owned addresses, ascending

    friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SynthData {
    std::vector<FlowRecord> inputs;
    std::vector<FlowRecord> outputs;
    AddressUserMap contraction;  // user id = smallest owned address
    GroundTruth truth;
};

SynthData generate(const SynthConfig& cfg);

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& text);

/// Writes txin.tsv, txout.tsv, contraction.tsv and ground_truth.json; returns the paths.
std::vector<std::string> write_synth(const SynthData& data, const std::string& out_dir);

}  // namespace txanomaly
