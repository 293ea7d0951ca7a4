#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>

#include "txanomaly/errors.hpp"
#include "txanomaly/pipeline.hpp"
#include "txanomaly/synth.hpp"

using namespace txanomaly;

namespace {

struct Options {
    PipelineConfig pipeline;
    std::string addresses;
    std::string contraction;
    std::string thefts;
    std::string flag_labels = "0";
};

std::vector<std::size_t> parse_labels(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const unsigned long v = std::stoul(item, &pos);
            if (pos != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ConfigError("invalid --flag-labels entry '" + item + "'");
        }
    }
    return out;
}

void add_inputs(CLI::App* cmd, Options& o) {
    cmd->add_option("--txin", o.pipeline.txin, "transaction inputs TSV (tx_id, addr_id, satoshi)")->required();
    cmd->add_option("--txout", o.pipeline.txout, "transaction outputs TSV (tx_id, addr_id, satoshi)")->required();
    cmd->add_option("--addresses", o.addresses, "optional address universe (one addr_id per line)");
}

void add_contraction(CLI::App* cmd, Options& o) {
    cmd->add_option("--contraction", o.contraction, "precomputed addr_id -> user_id TSV");
    cmd->add_flag("--derive-contraction", o.pipeline.derive_contraction,
                  "derive users with the common-input-ownership heuristic");
}

void add_cluster(CLI::App* cmd, Options& o) {
    auto& c = o.pipeline.cluster;
    cmd->add_option("--k", c.k, "number of clusters")->capture_default_str();
    cmd->add_option("--alpha", c.alpha, "trimmed fraction")->capture_default_str();
    cmd->add_option("--starts", c.n_starts, "k-means++ restarts")->capture_default_str();
    cmd->add_option("--max-iter", c.max_iter, "concentration steps per start")->capture_default_str();
    cmd->add_option("--tol", c.tol, "relative objective tolerance")->capture_default_str();
    cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--out", o.pipeline.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--threads", o.pipeline.cluster.threads, "worker threads (results do not depend on it)")
        ->capture_default_str();
}

void add_report(CLI::App* cmd, Options& o) {
    cmd->add_option("--thefts", o.thefts, "theft catalog TSV (case_id, case_name, addr_id)");
    cmd->add_option("--flag-labels", o.flag_labels, "comma-separated labels counted as anomalous")
        ->capture_default_str();
}

void finalize(Options& o) {
    if (!o.addresses.empty()) o.pipeline.addresses = o.addresses;
    if (!o.contraction.empty()) o.pipeline.contraction = o.contraction;
    if (!o.thefts.empty()) o.pipeline.thefts = o.thefts;
    o.pipeline.flag_labels = parse_labels(o.flag_labels);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collective anomaly detection over transaction graphs with trimmed k-means"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "run the whole pipeline");
    add_inputs(run, o);
    add_contraction(run, o);
    add_cluster(run, o);
    add_report(run, o);
    add_common(run, o);

    auto* stats = app.add_subcommand("ingest-stats", "validate inputs and write stats.json");
    add_inputs(stats, o);
    add_common(stats, o);

    auto* contract = app.add_subcommand("contract", "write contraction.tsv over the retained addresses");
    add_inputs(contract, o);
    add_contraction(contract, o);
    add_common(contract, o);

    auto* features = app.add_subcommand("features", "write features.csv from the flows and contraction.tsv");
    features->add_option("--txin", o.pipeline.txin)->required();
    features->add_option("--txout", o.pipeline.txout)->required();
    add_common(features, o);

    auto* normalize = app.add_subcommand("normalize", "fit the min-max scaler on features.csv");
    add_common(normalize, o);

    auto* cluster = app.add_subcommand("cluster", "trimmed k-means over the normalized features");
    add_cluster(cluster, o);
    add_common(cluster, o);

    auto* report = app.add_subcommand("report", "match the theft catalog and write the report");
    add_report(report, o);
    add_common(report, o);

    SynthConfig synth_cfg;
    std::string synth_out = "synth";
    auto* synth = app.add_subcommand("synth", "generate synthetic data with injected anomalous users");
    synth->add_option("--seed", synth_cfg.seed, "random seed")->capture_default_str();
    synth->add_option("--background", synth_cfg.n_background_users, "background users")->capture_default_str();
    synth->add_option("--anomalous", synth_cfg.n_anomalous_users, "injected anomalous users")->capture_default_str();
    synth->add_option("--min-txs", synth_cfg.min_txs_per_user, "fewest spending transactions per user")->capture_default_str();
    synth->add_option("--max-txs", synth_cfg.max_txs_per_user, "most spending transactions per user")->capture_default_str();
    synth->add_option("--min-amount", synth_cfg.min_amount, "log-uniform amount lower bound (satoshi)")->capture_default_str();
    synth->add_option("--max-amount", synth_cfg.max_amount, "log-uniform amount upper bound (satoshi)")->capture_default_str();
    synth->add_option("--scale", synth_cfg.anomaly_scale, "amount multiplier for anomalous users")->capture_default_str();
    synth->add_option("--anomalous-addresses", synth_cfg.min_addresses_per_anomalous,
                      "addresses per anomalous user")
        ->capture_default_str();
    synth->add_option("--background-addresses", synth_cfg.max_addresses_per_background,
                      "maximum addresses per background user")
        ->capture_default_str();
    synth->add_option("--out", synth_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        finalize(o);
        if (run->parsed()) {
            run_pipeline(o.pipeline);
        } else if (stats->parsed()) {
            stage_ingest_stats(o.pipeline);
        } else if (contract->parsed()) {
            if (o.pipeline.contraction.has_value() == o.pipeline.derive_contraction)
                throw ConfigError("exactly one of --contraction and --derive-contraction is required");
            stage_contract(o.pipeline);
        } else if (features->parsed()) {
            stage_features(o.pipeline);
        } else if (normalize->parsed()) {
            stage_normalize(o.pipeline);
        } else if (cluster->parsed()) {
            validate_parameters(o.pipeline.cluster);
            stage_cluster(o.pipeline);
        } else if (report->parsed()) {
            stage_report(o.pipeline);
        } else if (synth->parsed()) {
            synth_cfg.max_addresses_per_anomalous = synth_cfg.min_addresses_per_anomalous;
            write_synth(generate(synth_cfg), synth_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}
