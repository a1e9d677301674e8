#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kglp/baselines.hpp"
#include "kglp/config.hpp"
#include "kglp/eval.hpp"
#include "kglp/graph.hpp"
#include "kglp/hypersearch.hpp"
#include "kglp/rotate.hpp"
#include "kglp/splitter.hpp"
#include "kglp/synthgen.hpp"

namespace kglp {

// Orchestration behind the CLI subcommands. Every command writes its
// reports under cfg "outdir" with the resolved configuration embedded as
// '#' header comments, and returns its results for in-process use.

// Builds the graph declared by `layers` / `layer.<tag>.*` / `node_types`.
KnowledgeGraph load_graph(const RunConfig& cfg);

TrainConfig make_train_config(const RunConfig& cfg);

// w_r-scaled model distance over graph indexes (ascending = better).
Scorer make_model_scorer(const Model& model, const KnowledgeGraph& g,
                         const std::string& relation);

MetricsReport evaluate_split(const Model& model, const KnowledgeGraph& g,
                             const std::vector<Triple>& queries, const SplitBundle& bundle,
                             const RunConfig& cfg, const std::vector<int>& ks);

SynthResult cmd_synth(const RunConfig& cfg);
KnowledgeGraph cmd_ingest(const RunConfig& cfg);
SplitBundle cmd_split(const RunConfig& cfg);

struct TrainResult {
  Model model;
  TrainHistory history;
};
TrainResult cmd_train(const RunConfig& cfg);

MetricsReport cmd_eval(const RunConfig& cfg);

struct AblateStage {
  std::string label;
  MetricsReport metrics;
};
std::vector<AblateStage> cmd_ablate(const RunConfig& cfg);

struct CompareWeightedResult {
  MetricsReport original;
  MetricsReport weighted;
  std::map<std::string, double> best_weights;
};
CompareWeightedResult cmd_compare_weighted(const RunConfig& cfg);

struct BaselineRow {
  std::string method;
  MetricsReport metrics;
  bool ranked_fully = true;  // when false, MR/MP cells are reported as NA
};
std::vector<BaselineRow> cmd_baselines(const RunConfig& cfg);

SearchResult cmd_search(const RunConfig& cfg);

struct ExternalResult {
  std::vector<std::string> predictions;  // top-K gene ids
  std::vector<CurvePoint> model_curve;
  std::optional<std::vector<CurvePoint>> external_curve;
};
ExternalResult cmd_external(const RunConfig& cfg);

}  // namespace kglp
