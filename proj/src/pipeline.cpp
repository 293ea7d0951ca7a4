#include "txanomaly/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "txanomaly/errors.hpp"
#include "txanomaly/text.hpp"

namespace txanomaly {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string out_path(const PipelineConfig& cfg, const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void ensure_out_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
}

std::optional<std::vector<AddrId>> universe_of(const PipelineConfig& cfg) {
    if (!cfg.addresses) return std::nullopt;
    return load_address_universe(*cfg.addresses);
}

void log_line(const std::string& stage, const std::string& msg) {
    std::clog << "[" << stage << "] " << msg << '\n';
}

}  // namespace

void validate_pipeline_config(const PipelineConfig& cfg) {
    if (cfg.contraction.has_value() == cfg.derive_contraction)
        throw ConfigError("exactly one of --contraction and --derive-contraction is required");
    validate_parameters(cfg.cluster);
    if (cfg.flag_labels.empty()) throw ConfigError("flag label set must not be empty");
    for (std::size_t l : cfg.flag_labels)
        if (l > cfg.cluster.k)
            throw ConfigError("flag label " + std::to_string(l) + " exceeds k=" + std::to_string(cfg.cluster.k));
    if (cfg.out_dir.empty()) throw ConfigError("output directory must not be empty");
}

std::string stats_to_json(const DatasetStats& s) {
    ojson doc = {{"n_input_rows", s.n_input_rows},
                 {"n_output_rows", s.n_output_rows},
                 {"n_distinct_transactions", s.n_distinct_transactions},
                 {"n_universe_addresses", s.n_universe_addresses},
                 {"n_distinct_addresses", s.n_distinct_addresses},
                 {"n_wiped_addresses", s.n_wiped_addresses}};
    return doc.dump(2) + "\n";
}

DatasetStats stats_from_json(const std::string& text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        DatasetStats s;
        s.n_input_rows = doc.at("n_input_rows").get<std::uint64_t>();
        s.n_output_rows = doc.at("n_output_rows").get<std::uint64_t>();
        s.n_distinct_transactions = doc.at("n_distinct_transactions").get<std::uint64_t>();
        s.n_universe_addresses = doc.at("n_universe_addresses").get<std::uint64_t>();
        s.n_distinct_addresses = doc.at("n_distinct_addresses").get<std::uint64_t>();
        s.n_wiped_addresses = doc.at("n_wiped_addresses").get<std::uint64_t>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed stats.json: ") + e.what());
    }
}

std::string model_to_json(const ClusterModel<double>& model, const TrimmedKMeansConfig& cfg) {
    ojson doc;
    doc["config"] = {{"k", cfg.k},
                     {"alpha", cfg.alpha},
                     {"n_starts", cfg.n_starts},
                     {"max_iter", cfg.max_iter},
                     {"tol", cfg.tol},
                     {"seed", cfg.seed}};
    doc["objective"] = model.objective;
    doc["best_start"] = model.best_start;
    doc["iterations"] = model.iterations;
    std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
    if (static_cast<std::size_t>(model.centers.cols()) != names.size()) names.clear();
    doc["feature_names"] = names;
    ojson centers = ojson::array();
    for (Eigen::Index r = 0; r < model.centers.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < model.centers.cols(); ++c) row.push_back(model.centers(r, c));
        centers.push_back(std::move(row));
    }
    doc["centers"] = std::move(centers);
    return doc.dump(2) + "\n";
}

ClusterModel<double> model_from_json(const std::string& text, TrimmedKMeansConfig* cfg) {
    try {
        const auto doc = nlohmann::json::parse(text);
        ClusterModel<double> m;
        m.objective = doc.at("objective").get<double>();
        m.best_start = doc.at("best_start").get<std::size_t>();
        m.iterations = doc.at("iterations").get<std::size_t>();
        const auto rows = doc.at("centers").get<std::vector<std::vector<double>>>();
        const std::size_t d = rows.empty() ? 0 : rows.front().size();
        m.centers.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != d) throw ValidationError("model.json: ragged centers");
            for (std::size_t c = 0; c < d; ++c)
                m.centers(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        if (cfg) {
            const auto& j = doc.at("config");
            cfg->k = j.at("k").get<std::size_t>();
            cfg->alpha = j.at("alpha").get<double>();
            cfg->n_starts = j.at("n_starts").get<std::size_t>();
            cfg->max_iter = j.at("max_iter").get<std::size_t>();
            cfg->tol = j.at("tol").get<double>();
            cfg->seed = j.at("seed").get<std::uint64_t>();
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed model.json: ") + e.what());
    }
}

AssignmentRows read_assignments_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "user_id,label,distance")
        throw ParseError(path, 1, "expected header user_id,label,distance");
    AssignmentRows rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto f = split(line, ',');
        if (f.size() != 3) throw ParseError(path, line_no, "expected 3 columns");
        const auto user = parse_unsigned(f[0]);
        const auto label = parse_unsigned(f[1]);
        const auto dist = parse_real(f[2]);
        if (!user || !label || !dist) throw ParseError(path, line_no, "malformed row");
        rows.user_ids.push_back(*user);
        rows.labels.push_back(static_cast<std::size_t>(*label));
        rows.distances.push_back(*dist);
    }
    return rows;
}

std::vector<std::string> stage_ingest_stats(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto wiped = wipe_addresses(universe_of(cfg), cfg.txin, cfg.txout);
    const auto& s = wiped.stats;
    log_line("ingest", "input rows " + std::to_string(s.n_input_rows) + ", output rows " +
                           std::to_string(s.n_output_rows) + ", transactions " +
                           std::to_string(s.n_distinct_transactions));
    log_line("ingest", "addresses before wipe " + std::to_string(s.n_universe_addresses) +
                           ", after wipe " + std::to_string(s.n_distinct_addresses));
    const auto path = out_path(cfg, artifact::stats);
    write_file(path, stats_to_json(s));
    return {path};
}

std::vector<std::string> stage_contract(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto wiped = wipe_addresses(universe_of(cfg), cfg.txin, cfg.txout);
    AddressUserMap map = cfg.derive_contraction
                             ? build_contraction(cfg.txin, wiped.retained)
                             : load_contraction(cfg.contraction.value()).restricted_to(wiped.retained);
    log_line("contract", std::string(cfg.derive_contraction ? "derived" : "loaded") + " contraction: " +
                             std::to_string(map.size()) + " addresses -> " + std::to_string(map.n_users()) +
                             " users");
    const auto path = out_path(cfg, artifact::contraction);
    write_contraction(path, map);
    return {path};
}

std::vector<std::string> stage_features(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto map = load_contraction(out_path(cfg, artifact::contraction));
    const auto graph = build_user_graph(cfg.txin, cfg.txout, map);
    const auto features = assemble_feature_matrix(graph, cfg.cluster.threads);
    log_line("features", std::to_string(features.rows()) + " users, " +
                             std::to_string(graph.n_edge_instances) + " edge instances");
    const auto path = out_path(cfg, artifact::features);
    write_features_csv(path, features);
    return {path};
}

std::vector<std::string> stage_normalize(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto features = read_features_csv(out_path(cfg, artifact::features));
    const auto scaler = MinMaxScaler<double>::fit(features.values);
    const auto path = out_path(cfg, artifact::scaler);
    write_file(path, scaler_to_json(scaler, {kFeatureNames.begin(), kFeatureNames.end()}));
    return {path};
}

std::vector<std::string> stage_cluster(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto features = read_features_csv(out_path(cfg, artifact::features));
    const auto scaler = scaler_from_json(read_file(out_path(cfg, artifact::scaler)));
    const RowMatrix<double> normalized = scaler.transform(features.values);
    const auto result = trimmed_kmeans(normalized, cfg.cluster);
    log_line("cluster", "k=" + std::to_string(cfg.cluster.k) + " alpha=" + format_real(cfg.cluster.alpha) +
                            " trimmed=" + std::to_string(trim_count(cfg.cluster.alpha, features.rows())) +
                            " objective=" + format_real(result.model.objective) +
                            " best_start=" + std::to_string(result.model.best_start));
    const auto model_path = out_path(cfg, artifact::model);
    const auto assign_path = out_path(cfg, artifact::assignments);
    write_file(model_path, model_to_json(result.model, cfg.cluster));
    write_file(assign_path, dispersion_csv(features.user_ids, result.assignment.labels, result.assignment.distances));
    return {model_path, assign_path};
}

std::vector<std::string> stage_report(const PipelineConfig& cfg) {
    ensure_out_dir(cfg);
    const auto stats = stats_from_json(read_file(out_path(cfg, artifact::stats)));
    const auto map = load_contraction(out_path(cfg, artifact::contraction));
    TrimmedKMeansConfig used;
    const auto model = model_from_json(read_file(out_path(cfg, artifact::model)), &used);
    const auto rows = read_assignments_csv(out_path(cfg, artifact::assignments));
    const TheftCatalog catalog = cfg.thefts ? load_theft_catalog(*cfg.thefts) : TheftCatalog{};

    for (std::size_t l : cfg.flag_labels)
        if (l > used.k) throw ConfigError("flag label " + std::to_string(l) + " exceeds k=" + std::to_string(used.k));
    const std::set<std::size_t> flags(cfg.flag_labels.begin(), cfg.flag_labels.end());

    AnomalyReport report;
    report.config = {used.k, used.alpha, used.n_starts, used.max_iter, used.tol, used.seed,
                     std::vector<std::size_t>(flags.begin(), flags.end())};
    report.stages = {stats.n_universe_addresses, stats.n_distinct_addresses, map.n_users()};
    report.objective = model.objective;
    report.summaries = summarize(rows.labels, rows.distances, used.k);
    auto matched = match_catalog(catalog, map, rows.user_ids, rows.labels, flags);
    report.matches = std::move(matched.matches);
    report.counts = matched.counts;

    auto written = emit_report(report, rows.user_ids, rows.labels, rows.distances, cfg.out_dir);

    std::ostringstream log;
    log << "addresses_before_wipe\t" << report.stages.addresses_before_wipe << '\n'
        << "addresses_after_wipe\t" << report.stages.addresses_after_wipe << '\n'
        << "users_after_contraction\t" << report.stages.users_after_contraction << '\n'
        << "flagged_users\t" << report.counts.flagged_users << '\n'
        << "flagged_addresses\t" << report.counts.flagged_addresses << '\n'
        << "flagged_cases\t" << report.counts.flagged_cases << '\n'
        << "k\t" << used.k << '\n'
        << "alpha\t" << format_real(used.alpha) << '\n'
        << "n_starts\t" << used.n_starts << '\n'
        << "max_iter\t" << used.max_iter << '\n'
        << "tol\t" << format_real(used.tol) << '\n'
        << "seed\t" << used.seed << '\n';
    const auto log_path = out_path(cfg, artifact::log);
    write_file(log_path, log.str());
    written.push_back(log_path);
    log_line("report", "flagged users " + std::to_string(report.counts.flagged_users) + ", addresses " +
                           std::to_string(report.counts.flagged_addresses) + ", cases " +
                           std::to_string(report.counts.flagged_cases));
    return written;
}

void run_pipeline(const PipelineConfig& cfg) {
    validate_pipeline_config(cfg);
    std::vector<std::string> written;
    try {
        for (auto stage : {stage_ingest_stats, stage_contract, stage_features, stage_normalize, stage_cluster,
                           stage_report}) {
            auto paths = stage(cfg);
            written.insert(written.end(), paths.begin(), paths.end());
        }
    } catch (...) {
        for (const auto& p : written) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        throw;
    }
}

int exit_code_for(const std::exception& e) {
    return dynamic_cast<const ConfigError*>(&e) != nullptr ? 2 : 1;
}

}  // namespace txanomaly
