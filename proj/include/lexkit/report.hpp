#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexkit/evaluator.hpp"
#include "lexkit/vocabulary.hpp"

namespace lexkit {

struct LabelSummary {
  std::string surface;
  std::string cluster;
  std::size_t n = 0;
  double mean_mrr = 0.0;
  double mean_p1 = 0.0;
};

struct ClusterSummary {
  std::string cluster;
  std::size_t n_labels = 0;  // member labels with at least one instance
  std::size_t n_instances = 0;
  double mean_mrr = 0.0;
  double mean_p1 = 0.0;
};

// #T, #L and #T/L. Token counts are whitespace tokens.
struct TaskStats {
  std::size_t n_instances = 0;
  double avg_input_tokens = 0.0;
  std::size_t n_labels = 0;
  double avg_tokens_per_label = 0.0;
  double avg_subtokens_per_label = 0.0;  // scorer tokens, from the results
};

struct TaskReport {
  std::string task_id;
  std::string model_id;
  std::vector<LabelSummary> labels;  // vocabulary order, empty labels included
  // Empty when every label is its own cluster.
  std::vector<ClusterSummary> clusters;
  bool weighted_clusters = false;
  std::vector<std::string> zero_instance_labels;
  double macro_mrr = 0.0;
  double macro_p1 = 0.0;
  TaskStats stats;

  nlohmann::json to_json() const;
  static TaskReport from_json(const nlohmann::json& doc);
};

struct AggregateOptions {
  // Cluster means over instances instead of over member labels.
  bool weighted_clusters = false;
  std::string model_id;
};

// Per-label means, then the unweighted macro over labels with instances.
TaskReport aggregate(const std::vector<InstanceResult>& results, const TermVocabulary& vocab,
                     const AggregateOptions& options = {});

struct CurveBucket {
  std::size_t k = 0;
  std::size_t count = 0;
  double mean_mrr = 0.0;
  double mean_p1 = 0.0;
};

// Mean MRR by number of gold sub-tokens, ascending k.
std::vector<CurveBucket> complexity_curve(const std::vector<InstanceResult>& results);
std::string curve_to_csv(const std::vector<CurveBucket>& curve);

struct RankedModel {
  std::string model_id;
  double average = 0.0;
  std::size_t rank = 0;
};

// Competition ranking, best first: averages within `tolerance` share a rank
// and the next rank skips (1, 2, 2, 4).
std::vector<RankedModel> rank_models(const std::vector<std::pair<std::string, double>>& averages,
                                     double tolerance = 1e-9);

enum class ReportFormat { json, csv, markdown };
std::optional<ReportFormat> parse_report_format(std::string_view name);

// Per-label table of one task and model.
std::string render(const TaskReport& report, ReportFormat format);

// Tasks by models: P@1 and MRR per cell, an Average row (macro over tasks)
// and a Model Rank row ranked by average MRR.
std::string render_leaderboard(const std::vector<TaskReport>& reports, ReportFormat format);

}  // namespace lexkit
