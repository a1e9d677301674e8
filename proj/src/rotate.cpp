#include "kglp/rotate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "kglp/error.hpp"

namespace kglp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Accumulates coef * d(dist(h,r,t))/d(params) through the callbacks. The
// modulus subgradient at 0 is taken as 0.
template <typename AddEnt, typename AddPhase>
void accumulate_triple(const Model& m, std::int32_t h, std::int32_t r, std::int32_t t,
                       double coef, AddEnt&& add_ent, AddPhase&& add_phase) {
  const int k = m.dim();
  auto he = m.entity(h);
  auto te = m.entity(t);
  auto ph = m.phase(r);
  for (int j = 0; j < k; ++j) {
    double c = std::cos(ph[j]), s = std::sin(ph[j]);
    double hr_re = he[2 * j] * c - he[2 * j + 1] * s;
    double hr_im = he[2 * j] * s + he[2 * j + 1] * c;
    double u_re = hr_re - te[2 * j];
    double u_im = hr_im - te[2 * j + 1];
    double mod = std::sqrt(u_re * u_re + u_im * u_im);
    if (mod == 0.0) continue;
    double g_re = coef * u_re / mod;
    double g_im = coef * u_im / mod;
    add_ent(h, 2 * j, g_re * c + g_im * s);
    add_ent(h, 2 * j + 1, -g_re * s + g_im * c);
    add_ent(t, 2 * j, -g_re);
    add_ent(t, 2 * j + 1, -g_im);
    // d(h o r)/d(theta) rotates h o r by 90 degrees.
    add_phase(r, j, -g_re * hr_im + g_im * hr_re);
  }
}

void put_u32(std::string& b, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}
void put_f64(std::string& b, double x) {
  std::uint64_t u;
  std::memcpy(&u, &x, 8);
  put_u64(b, u);
}
void put_str(std::string& b, const std::string& s) {
  put_u32(b, static_cast<std::uint32_t>(s.size()));
  b.append(s);
}

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw Error("checkpoint: truncated or corrupted file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return x;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return x;
  }
  double f64() {
    std::uint64_t u = u64();
    double x;
    std::memcpy(&x, &u, 8);
    return x;
  }
  std::string str() {
    std::uint32_t n = u32();
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

constexpr char kMagic[] = "KGLPCKPT";
constexpr std::uint32_t kVersion = 1;

}  // namespace

void TrainConfig::validate() const {
  if (dim < 1) throw Error("config: dim must be >= 1");
  if (!(gamma > 0)) throw Error("config: gamma must be > 0");
  if (negatives < 1) throw Error("config: negatives must be >= 1");
  if (!(adv_alpha >= 0)) throw Error("config: adv_alpha must be >= 0");
  if (!(lr > 0)) throw Error("config: lr must be > 0");
  if (batch_size < 1) throw Error("config: batch_size must be >= 1");
  if (max_epochs < 0) throw Error("config: max_epochs must be >= 0");
  if (patience < 0 || patience > max_epochs)
    throw Error("config: patience must be in [0, max_epochs]");
  if (eval_every < 1) throw Error("config: eval_every must be >= 1");
  for (const auto& [rel, w] : relation_weights)
    if (!(w > 0)) throw Error("config: relation weight for '" + rel + "' must be > 0");
}

Model Model::init(const KnowledgeGraph& g, const TrainConfig& cfg, Rng& rng) {
  cfg.validate();
  Model m;
  m.k_ = cfg.dim;
  m.gamma_ = cfg.gamma;
  m.node_ids_.reserve(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    m.node_ids_.push_back(g.node_id(static_cast<std::int32_t>(i)));
    m.node_index_.emplace(m.node_ids_.back(), static_cast<std::int32_t>(i));
  }
  for (std::size_t r = 0; r < g.relation_count(); ++r) {
    m.relations_.push_back(g.relation_name(static_cast<std::int32_t>(r)));
    m.rel_index_.emplace(m.relations_.back(), static_cast<std::int32_t>(r));
    auto it = cfg.relation_weights.find(m.relations_.back());
    m.weight_.push_back(it == cfg.relation_weights.end() ? 1.0 : it->second);
  }
  const double bound = cfg.gamma / (2.0 * cfg.dim);
  m.ent_.resize(g.node_count() * 2 * cfg.dim);
  for (double& x : m.ent_) x = rng.uniform(-bound, bound);
  m.phase_.resize(g.relation_count() * cfg.dim);
  for (double& x : m.phase_) x = rng.uniform(-kPi, kPi);
  return m;
}

std::int32_t Model::find_node(const std::string& id) const {
  auto it = node_index_.find(id);
  return it == node_index_.end() ? -1 : it->second;
}

std::int32_t Model::find_relation(const std::string& name) const {
  auto it = rel_index_.find(name);
  return it == rel_index_.end() ? -1 : it->second;
}

// Weight 0 is allowed here for limit analysis; training configs require > 0.
void Model::set_relation_weight(std::int32_t r, double w) {
  if (!(w >= 0)) throw Error("relation weight must be >= 0");
  weight_[r] = w;
}

double Model::distance(std::int32_t h, std::int32_t r, std::int32_t t) const {
  auto he = entity(h);
  auto te = entity(t);
  auto ph = phase(r);
  double d = 0;
  for (int j = 0; j < k_; ++j) {
    double c = std::cos(ph[j]), s = std::sin(ph[j]);
    double u_re = he[2 * j] * c - he[2 * j + 1] * s - te[2 * j];
    double u_im = he[2 * j] * s + he[2 * j + 1] * c - te[2 * j + 1];
    d += std::sqrt(u_re * u_re + u_im * u_im);
  }
  return d;
}

double Model::distance(const Triple& t) const {
  std::int32_t h = find_node(t.head);
  std::int32_t tl = find_node(t.tail);
  std::int32_t r = find_relation(t.relation);
  if (h < 0) throw Error("distance: unknown node '" + t.head + "'");
  if (tl < 0) throw Error("distance: unknown node '" + t.tail + "'");
  if (r < 0) throw Error("distance: unknown relation '" + t.relation + "'");
  return distance(h, r, tl);
}

double Model::unit_modulus_error() const {
  double worst = 0;
  for (double th : phase_) {
    double c = std::cos(th), s = std::sin(th);
    worst = std::max(worst, std::fabs(c * c + s * s - 1.0));
  }
  return worst;
}

NegativeBatch sample_negatives(const KnowledgeGraph& g, const IndexedTriple& positive,
                               int n, Rng& rng) {
  if (n < 1) throw Error("sample_negatives: n must be >= 1");
  NegativeBatch batch;
  batch.corrupted.reserve(n);
  batch.head_side.reserve(n);
  for (int i = 0; i < n; ++i) {
    bool corrupt_head = rng.below(2) == 0;
    std::int32_t original = corrupt_head ? positive.head : positive.tail;
    const auto& pool = g.nodes_of_type(g.node_type(original));
    if (pool.size() < 2)
      throw Error("sample_negatives: candidate pool for type '" +
                  g.node_type(original) + "' has fewer than 2 nodes");
    std::int32_t pick;
    do {
      pick = pool[rng.index(pool.size())];
    } while (pick == original);
    IndexedTriple neg = positive;
    (corrupt_head ? neg.head : neg.tail) = pick;
    batch.corrupted.push_back(neg);
    batch.head_side.push_back(corrupt_head);
  }
  return batch;
}

NegativeBatch adversarial_weights(const Model& m, NegativeBatch batch, double alpha) {
  if (batch.corrupted.empty()) throw Error("adversarial_weights: empty batch");
  const std::size_t n = batch.corrupted.size();
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = batch.corrupted[i];
    logits[i] = alpha * (m.margin() - m.distance(t.head, t.rel, t.tail));
  }
  double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0;
  batch.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.weights[i] = std::exp(logits[i] - peak);
    total += batch.weights[i];
  }
  for (double& w : batch.weights) w /= total;
  return batch;
}

double loss_edge(const Model& m, const IndexedTriple& positive,
                 const NegativeBatch& batch, bool weighted) {
  if (batch.weights.size() != batch.corrupted.size())
    throw Error("loss_edge: batch weights not set");
  const double w = weighted ? m.relation_weight(positive.rel) : 1.0;
  const double gamma = m.margin();
  double loss = softplus(w * m.distance(positive.head, positive.rel, positive.tail) - gamma);
  for (std::size_t i = 0; i < batch.corrupted.size(); ++i) {
    const auto& t = batch.corrupted[i];
    loss += batch.weights[i] * softplus(gamma - w * m.distance(t.head, t.rel, t.tail));
  }
  return loss;
}

namespace {

// Shared edge-gradient core; loss coefficient per triple times the distance
// jacobian, positive then negatives.
template <typename AddEnt, typename AddPhase>
void edge_grad(const Model& m, const IndexedTriple& positive, const NegativeBatch& batch,
               bool weighted, double scale, AddEnt&& add_ent, AddPhase&& add_phase) {
  const double w = weighted ? m.relation_weight(positive.rel) : 1.0;
  const double gamma = m.margin();
  double dpos = m.distance(positive.head, positive.rel, positive.tail);
  double coef = scale * w * sigmoid(w * dpos - gamma);
  accumulate_triple(m, positive.head, positive.rel, positive.tail, coef, add_ent, add_phase);
  for (std::size_t i = 0; i < batch.corrupted.size(); ++i) {
    const auto& t = batch.corrupted[i];
    double di = m.distance(t.head, t.rel, t.tail);
    double ci = -scale * w * batch.weights[i] * sigmoid(gamma - w * di);
    accumulate_triple(m, t.head, t.rel, t.tail, ci, add_ent, add_phase);
  }
}

}  // namespace

GradRecord grad_edge(const Model& m, const IndexedTriple& positive,
                     const NegativeBatch& batch, bool weighted) {
  if (batch.weights.size() != batch.corrupted.size())
    throw Error("grad_edge: batch weights not set");
  GradRecord rec;
  const int k = m.dim();
  auto touch = [&](std::int32_t v) {
    auto& vec = rec.entity[v];
    if (vec.empty()) vec.assign(2 * k, 0.0);
  };
  touch(positive.head);
  touch(positive.tail);
  for (const auto& t : batch.corrupted) {
    touch(t.head);
    touch(t.tail);
  }
  rec.relation[positive.rel].assign(k, 0.0);
  edge_grad(
      m, positive, batch, weighted, 1.0,
      [&](std::int32_t v, int idx, double g) { rec.entity[v][idx] += g; },
      [&](std::int32_t r, int j, double g) { rec.relation[r][j] += g; });
  return rec;
}

namespace {

struct AdamState {
  std::vector<double> m, v;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& st,
               long t, double lr) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double g = grad[i];
    st.m[i] = b1 * st.m[i] + (1 - b1) * g;
    st.v[i] = b2 * st.v[i] + (1 - b2) * g * g;
    params[i] -= lr * (st.m[i] / c1) / (std::sqrt(st.v[i] / c2) + eps);
  }
}

}  // namespace

std::pair<Model, TrainHistory> train(const KnowledgeGraph& g, const SplitBundle& split,
                                     const TrainConfig& cfg, const EvalHook& hook) {
  cfg.validate();
  if (split.train.empty()) throw Error("train: empty train split");

  Rng root(cfg.seed);
  Rng init_rng = root.stream("init");
  Rng neg_rng = root.stream("negatives");
  Rng batch_rng = root.stream("batches");

  Model model = Model::init(g, cfg, init_rng);
  TrainHistory history;

  std::vector<IndexedTriple> edges;
  edges.reserve(split.train.size());
  for (const auto& t : split.train) edges.push_back(g.to_indexed(t));

  std::vector<double> ent_grad(model.entity_count() * 2 * cfg.dim, 0.0);
  std::vector<double> phase_grad(model.relation_count() * cfg.dim, 0.0);
  AdamState ent_state(ent_grad.size());
  AdamState phase_state(phase_grad.size());
  long step = 0;

  Model best;
  double best_mp = -1.0;
  int bad_evals = 0;
  bool stop = false;

  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.max_epochs && !stop; ++epoch) {
    batch_rng.shuffle(order);
    double epoch_loss = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      std::size_t end = std::min(order.size(), start + cfg.batch_size);
      double scale = 1.0 / static_cast<double>(end - start);
      std::fill(ent_grad.begin(), ent_grad.end(), 0.0);
      std::fill(phase_grad.begin(), phase_grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const IndexedTriple& pos = edges[order[b]];
        NegativeBatch batch = adversarial_weights(
            model, sample_negatives(g, pos, cfg.negatives, neg_rng), cfg.adv_alpha);
        epoch_loss += loss_edge(model, pos, batch, cfg.weighted);
        edge_grad(
            model, pos, batch, cfg.weighted, scale,
            [&](std::int32_t v, int idx, double gr) {
              ent_grad[static_cast<std::size_t>(v) * 2 * cfg.dim + idx] += gr;
            },
            [&](std::int32_t r, int j, double gr) {
              phase_grad[static_cast<std::size_t>(r) * cfg.dim + j] += gr;
            });
      }
      ++step;
      adam_step(model.entity_params(), ent_grad, ent_state, step, cfg.lr);
      adam_step(model.phase_params(), phase_grad, phase_state, step, cfg.lr);
    }
    epoch_loss /= static_cast<double>(edges.size());
    if (!std::isfinite(epoch_loss))
      throw Error("train: loss diverged at epoch " + std::to_string(epoch));
    history.epoch_loss.push_back(epoch_loss);

    if (hook && epoch % cfg.eval_every == 0) {
      double mp = hook(model);
      history.evals.emplace_back(epoch, mp);
      if (mp > best_mp) {
        best_mp = mp;
        best = model;
        history.best_epoch = epoch;
        bad_evals = 0;
      } else if (++bad_evals >= cfg.patience && cfg.patience > 0) {
        stop = true;
      }
    }
  }
  if (history.best_epoch >= 0) return {std::move(best), std::move(history)};
  return {std::move(model), std::move(history)};
}

void write_history(const TrainHistory& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_history: cannot write " + path);
  out << "epoch,loss,valid_mp\n";
  std::size_t e = 0;
  char buf[64];
  for (std::size_t i = 0; i < h.epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.10g", h.epoch_loss[i]);
    out << (i + 1) << ',' << buf << ',';
    if (e < h.evals.size() && h.evals[e].first == static_cast<int>(i + 1)) {
      std::snprintf(buf, sizeof(buf), "%.10g", h.evals[e].second);
      out << buf;
      ++e;
    }
    out << '\n';
  }
  if (h.best_epoch >= 0) out << "# best_epoch=" << h.best_epoch << '\n';
}

void Model::save(const std::string& path) const {
  std::string buf;
  buf.append(kMagic, 8);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(k_));
  put_f64(buf, gamma_);
  put_u64(buf, node_ids_.size());
  put_u64(buf, relations_.size());
  for (const auto& id : node_ids_) put_str(buf, id);
  for (std::size_t r = 0; r < relations_.size(); ++r) {
    put_str(buf, relations_[r]);
    put_f64(buf, weight_[r]);
  }
  for (double x : ent_) put_f64(buf, x);
  for (double x : phase_) put_f64(buf, x);
  put_u64(buf, fnv1a(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot write " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error("checkpoint: write failed for " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot read " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 8 + 4 + 8) throw Error("checkpoint: truncated or corrupted file");
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i)
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[buf.size() - 8 + i]))
              << (8 * i);
  if (fnv1a(buf.data(), buf.size() - 8) != stored)
    throw Error("checkpoint: digest mismatch (corrupted file)");

  Reader r{buf};
  r.need(8);
  if (std::memcmp(buf.data(), kMagic, 8) != 0)
    throw Error("checkpoint: bad magic in " + path);
  r.pos = 8;
  std::uint32_t version = r.u32();
  if (version != kVersion)
    throw Error("checkpoint: unsupported version " + std::to_string(version));

  Model m;
  m.k_ = static_cast<int>(r.u32());
  m.gamma_ = r.f64();
  std::uint64_t n_nodes = r.u64();
  std::uint64_t n_rels = r.u64();
  for (std::uint64_t i = 0; i < n_nodes; ++i) {
    m.node_ids_.push_back(r.str());
    m.node_index_.emplace(m.node_ids_.back(), static_cast<std::int32_t>(i));
  }
  for (std::uint64_t i = 0; i < n_rels; ++i) {
    m.relations_.push_back(r.str());
    m.rel_index_.emplace(m.relations_.back(), static_cast<std::int32_t>(i));
    m.weight_.push_back(r.f64());
  }
  m.ent_.resize(n_nodes * 2 * m.k_);
  for (double& x : m.ent_) x = r.f64();
  m.phase_.resize(n_rels * m.k_);
  for (double& x : m.phase_) x = r.f64();
  if (r.pos != buf.size() - 8) throw Error("checkpoint: trailing bytes in " + path);
  return m;
}

}  // namespace kglp
