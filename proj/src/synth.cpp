#include "txanomaly/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <json.hpp>

#include "txanomaly/errors.hpp"
#include "txanomaly/random.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

void validate_synth_config(const SynthConfig& c) {
    if (c.n_background_users < 1) throw ConfigError("synth: need at least one background user");
    if (c.n_anomalous_users < 1) throw ConfigError("synth: need at least one anomalous user");
    if (c.min_txs_per_user < 1 || c.max_txs_per_user < c.min_txs_per_user)
        throw ConfigError("synth: txs per user range must satisfy 1 <= min <= max");
    if (c.min_amount < 1 || c.max_amount < c.min_amount)
        throw ConfigError("synth: amount range must satisfy 1 <= min <= max");
    if (!(c.anomaly_scale > 1.0) || !std::isfinite(c.anomaly_scale))
        throw ConfigError("synth: anomaly scale must exceed 1");
    if (c.min_addresses_per_anomalous < 2 || c.max_addresses_per_anomalous < c.min_addresses_per_anomalous)
        throw ConfigError("synth: anomalous users need a range of at least 2 addresses");
    if (c.min_addresses_per_background < 1 ||
        c.max_addresses_per_background < c.min_addresses_per_background)
        throw ConfigError("synth: background address range must satisfy 1 <= min <= max");
    if (c.max_recipients < 1) throw ConfigError("synth: max_recipients must be at least 1");
    if (static_cast<double>(c.max_amount) * c.anomaly_scale > 1e18)
        throw ConfigError("synth: scaled amounts would exceed the 64-bit satoshi range");
}

SynthData generate(const SynthConfig& cfg) {
    validate_synth_config(cfg);
    std::mt19937_64 rng(cfg.seed);
    const std::size_t n_users = cfg.n_background_users + cfg.n_anomalous_users;

    // Shuffle which user slots are anomalous so they are not clustered by id.
    std::vector<bool> anomalous(n_users, false);
    std::fill(anomalous.begin(), anomalous.begin() + static_cast<std::ptrdiff_t>(cfg.n_anomalous_users), true);
    for (std::size_t i = n_users - 1; i > 0; --i) std::swap(anomalous[i], anomalous[uniform_index(rng, i + 1)]);

    std::vector<std::vector<AddrId>> owned(n_users);
    AddrId next_addr = 1;
    for (std::size_t u = 0; u < n_users; ++u) {
        const std::size_t count =
            anomalous[u] ? uniform_between(rng, cfg.min_addresses_per_anomalous, cfg.max_addresses_per_anomalous)
                         : uniform_between(rng, cfg.min_addresses_per_background, cfg.max_addresses_per_background);
        for (std::size_t a = 0; a < count; ++a) owned[u].push_back(next_addr++);
    }

    std::vector<std::size_t> senders;
    for (std::size_t u = 0; u < n_users; ++u) {
        const std::size_t txs = uniform_between(rng, cfg.min_txs_per_user, cfg.max_txs_per_user);
        senders.insert(senders.end(), txs, u);
    }
    for (std::size_t i = senders.size() - 1; i > 0; --i) std::swap(senders[i], senders[uniform_index(rng, i + 1)]);

    const double log_lo = std::log(static_cast<double>(cfg.min_amount));
    const double log_hi = std::log(static_cast<double>(cfg.max_amount));

    SynthData data;
    TxId tx = 1;
    for (std::size_t u : senders) {
        const auto& addrs = owned[u];
        const Satoshi per_address_unit = addrs.size();
        double amount = std::exp(log_lo + (log_hi - log_lo) * unit_uniform(rng));
        if (anomalous[u]) amount *= cfg.anomaly_scale;
        // Even split across the sender's addresses.
        const Satoshi share = std::max<Satoshi>(1, static_cast<Satoshi>(std::llround(amount / static_cast<double>(per_address_unit))));
        const Satoshi total = share * per_address_unit;
        for (AddrId a : addrs) data.inputs.push_back({tx, a, share});

        const std::size_t recipients = std::min<Satoshi>(uniform_between(rng, 1, cfg.max_recipients), total);
        Satoshi remaining = total;
        for (std::size_t r = 0; r < recipients; ++r) {
            std::size_t v = uniform_index(rng, n_users - 1);
            if (v >= u) ++v;
            const AddrId dest = owned[v][uniform_index(rng, owned[v].size())];
            Satoshi part = remaining;
            if (r + 1 < recipients) {
                const Satoshi slack = remaining - (recipients - r - 1);
                part = 1 + static_cast<Satoshi>(unit_uniform(rng) * static_cast<double>(slack - 1));
                part = std::min(part, slack);
            }
            remaining -= part;
            data.outputs.push_back({tx, dest, part});
        }
        ++tx;
    }

    std::vector<std::pair<AddrId, UserId>> pairs;
    for (std::size_t u = 0; u < n_users; ++u) {
        const UserId id = owned[u].front();
        data.truth.owners[id] = owned[u];
        if (anomalous[u]) data.truth.anomalous_users.push_back(id);
        for (AddrId a : owned[u]) pairs.emplace_back(a, id);
    }
    std::sort(data.truth.anomalous_users.begin(), data.truth.anomalous_users.end());
    data.contraction = AddressUserMap::from_pairs(std::move(pairs));
    return data;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
    nlohmann::ordered_json doc;
    doc["anomalous_users"] = truth.anomalous_users;
    nlohmann::ordered_json users = nlohmann::ordered_json::array();
    for (const auto& [user, addrs] : truth.owners) users.push_back({{"user_id", user}, {"addresses", addrs}});
    doc["users"] = std::move(users);
    return doc.dump(2) + "\n";
}

GroundTruth ground_truth_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        GroundTruth t;
        t.anomalous_users = doc.at("anomalous_users").get<std::vector<UserId>>();
        for (const auto& u : doc.at("users"))
            t.owners[u.at("user_id").get<UserId>()] = u.at("addresses").get<std::vector<AddrId>>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed ground_truth.json: ") + e.what());
    }
}

std::vector<std::string> write_synth(const SynthData& data, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
    std::vector<std::string> written{path("txin.tsv"), path("txout.tsv"), path("contraction.tsv"),
                                     path("ground_truth.json")};
    write_flow_records(written[0], data.inputs);
    write_flow_records(written[1], data.outputs);
    write_contraction(written[2], data.contraction);
    write_file(written[3], ground_truth_to_json(data.truth));
    return written;
}

}  // namespace txanomaly
