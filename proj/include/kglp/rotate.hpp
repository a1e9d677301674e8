#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kglp/graph.hpp"
#include "kglp/rng.hpp"
#include "kglp/splitter.hpp"

namespace kglp {

struct TrainConfig {
  int dim = 64;            // k: complex coordinates per embedding
  double gamma = 6.0;      // margin
  int negatives = 16;      // corrupted samples per positive
  double adv_alpha = 1.0;  // self-adversarial temperature
  double lr = 0.02;
  int batch_size = 128;
  int max_epochs = 200;
  int patience = 10;   // evals without improvement before stopping
  int eval_every = 10; // epochs between validation evals
  std::uint64_t seed = 1;
  bool weighted = false;  // use the relation-weighted loss
  std::map<std::string, double> relation_weights;  // default weight 1

  void validate() const;
};

// Complex-rotation embedding model. Entities are complex k-vectors stored as
// interleaved (re, im) pairs; relations are phase vectors, so the implicit
// relation embedding (cos th, sin th) has unit modulus by parameterization.
// Relation weights are hyperparameters, never gradient-trained.
class Model {
 public:
  Model() = default;

  // Entity reals uniform in [-gamma/(2k), gamma/(2k)], phases in [-pi, pi].
  static Model init(const KnowledgeGraph& g, const TrainConfig& cfg, Rng& rng);

  int dim() const { return k_; }
  double margin() const { return gamma_; }
  std::size_t entity_count() const { return node_ids_.size(); }
  std::size_t relation_count() const { return relations_.size(); }

  const std::vector<std::string>& node_ids() const { return node_ids_; }
  const std::vector<std::string>& relations() const { return relations_; }
  std::int32_t find_node(const std::string& id) const;
  std::int32_t find_relation(const std::string& name) const;

  double relation_weight(std::int32_t r) const { return weight_[r]; }
  void set_relation_weight(std::int32_t r, double w);

  // d_r(h, t) = sum_j |h_j * r_j - t_j|, complex modulus per coordinate.
  double distance(std::int32_t h, std::int32_t r, std::int32_t t) const;
  double distance(const Triple& t) const;  // id-based, throws on unknowns

  std::span<double> entity(std::int32_t v) { return {ent_.data() + 2 * k_ * v, 2 * std::size_t(k_)}; }
  std::span<const double> entity(std::int32_t v) const { return {ent_.data() + 2 * k_ * v, 2 * std::size_t(k_)}; }
  std::span<double> phase(std::int32_t r) { return {phase_.data() + std::size_t(k_) * r, std::size_t(k_)}; }
  std::span<const double> phase(std::int32_t r) const { return {phase_.data() + std::size_t(k_) * r, std::size_t(k_)}; }
  std::span<double> entity_params() { return ent_; }
  std::span<double> phase_params() { return phase_; }

  // Largest |cos^2 + sin^2 - 1| over all relation coordinates; bounded by
  // rounding of the check itself since only phases are stored.
  double unit_modulus_error() const;

  void save(const std::string& path) const;
  static Model load(const std::string& path);

 private:
  friend struct ModelAccess;
  int k_ = 0;
  double gamma_ = 0;
  std::vector<std::string> node_ids_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::int32_t> node_index_;
  std::unordered_map<std::string, std::int32_t> rel_index_;
  std::vector<double> ent_;    // entity_count * 2k
  std::vector<double> phase_;  // relation_count * k
  std::vector<double> weight_; // relation_count
};

// Corrupted triples for one positive edge. All share the positive's relation
// and differ from it in exactly one node slot.
struct NegativeBatch {
  std::vector<IndexedTriple> corrupted;
  std::vector<bool> head_side;  // true when the head was replaced
  std::vector<double> weights;  // empty until adversarial_weights
};

// Corrupts head or tail with probability 1/2 each, drawing uniformly from
// nodes of the replaced slot's type; the replacement always differs from the
// original node. Requires a pool of at least 2 candidates.
NegativeBatch sample_negatives(const KnowledgeGraph& g, const IndexedTriple& positive,
                               int n, Rng& rng);

// p_i = softmax_i(alpha * (gamma - d_i)); the weights act as constants in the
// loss (no gradient flows through them).
NegativeBatch adversarial_weights(const Model& m, NegativeBatch batch, double alpha);

// Negative-sampling loss for one edge:
//   L  = -log sig(gamma - d+) - sum_i p_i log sig(d_i - gamma)
// and with `weighted` the per-relation weight scales every distance:
//   L' = -log sig(gamma - w_r d+) - sum_i p_i log sig(w_r d_i - gamma).
double loss_edge(const Model& m, const IndexedTriple& positive,
                 const NegativeBatch& batch, bool weighted);

// Sparse analytic gradient of loss_edge over touched entities and the
// relation's phases. Subgradient of the modulus at 0 is 0.
struct GradRecord {
  std::unordered_map<std::int32_t, std::vector<double>> entity;    // node -> 2k
  std::unordered_map<std::int32_t, std::vector<double>> relation;  // rel -> k
};
GradRecord grad_edge(const Model& m, const IndexedTriple& positive,
                     const NegativeBatch& batch, bool weighted);

struct TrainHistory {
  std::vector<double> epoch_loss;
  std::vector<std::pair<int, double>> evals;  // (epoch, validation MP)
  int best_epoch = -1;
};

// Returns validation mean percentile for a model snapshot (higher is better).
using EvalHook = std::function<double(const Model&)>;

// Mini-batch Adam training over the bundle's train triples. Every
// `eval_every` epochs the hook scores the model on validation; the best
// snapshot is kept and returned. Stops early after `patience` evals without
// improvement. Deterministic given the seed (single-threaded). Throws when
// the loss goes non-finite.
std::pair<Model, TrainHistory> train(const KnowledgeGraph& g, const SplitBundle& split,
                                     const TrainConfig& cfg, const EvalHook& hook = {});

void write_history(const TrainHistory& h, const std::string& path);

}  // namespace kglp
