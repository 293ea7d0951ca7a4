#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "txanomaly/cluster.hpp"
#include "txanomaly/contraction.hpp"
#include "txanomaly/features.hpp"
#include "txanomaly/ingest.hpp"
#include "txanomaly/normalize.hpp"
#include "txanomaly/report.hpp"

namespace txanomaly {

/// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* stats = "stats.json";
inline constexpr const char* contraction = "contraction.tsv";
inline constexpr const char* features = "features.csv";
inline constexpr const char* scaler = "scaler.json";
inline constexpr const char* model = "model.json";
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* dispersion = "dispersion.csv";
inline constexpr const char* matches = "matches.csv";
inline constexpr const char* log = "pipeline.log";
}  // namespace artifact

struct PipelineConfig {
    std::string txin;
    std::string txout;
    std::optional<std::string> addresses;
    std::optional<std::string> contraction;
    bool derive_contraction = false;
    std::optional<std::string> thefts;
    TrimmedKMeansConfig cluster;  // defaults k = 8, alpha = 0.01
    std::vector<std::size_t> flag_labels{0};
    std::string out_dir = "out";
};

/// Parameter checks that need no data. Throws ConfigError.
void validate_pipeline_config(const PipelineConfig& cfg);

// Each stage reads its inputs (raw files or the previous stage's artifacts in out_dir) and
// writes its own artifacts. Staged execution and run_pipeline therefore produce identical
// bytes. Each returns the paths it wrote.

std::vector<std::string> stage_ingest_stats(const PipelineConfig& cfg);
std::vector<std::string> stage_contract(const PipelineConfig& cfg);
std::vector<std::string> stage_features(const PipelineConfig& cfg);
std::vector<std::string> stage_normalize(const PipelineConfig& cfg);
std::vector<std::string> stage_cluster(const PipelineConfig& cfg);
std::vector<std::string> stage_report(const PipelineConfig& cfg);

/// ingest -> contract -> features -> normalize -> cluster -> report. On any error the files
/// written so far are removed and the exception propagates.
void run_pipeline(const PipelineConfig& cfg);

std::string stats_to_json(const DatasetStats& stats);
DatasetStats stats_from_json(const std::string& text);

std::string model_to_json(const ClusterModel<double>& model, const TrimmedKMeansConfig& cfg);
/// Parses model.json back into the model and its configuration echo (threads excluded).
ClusterModel<double> model_from_json(const std::string& text, TrimmedKMeansConfig* cfg = nullptr);

struct AssignmentRows {
    std::vector<UserId> user_ids;
    std::vector<std::size_t> labels;
    std::vector<double> distances;
};
AssignmentRows read_assignments_csv(const std::string& path);

/// Exit code for an exception escaping a stage: 2 for ConfigError, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace txanomaly
