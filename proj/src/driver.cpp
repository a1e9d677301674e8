#include "kglp/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "kglp/error.hpp"

namespace kglp {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string ensure_outdir(const RunConfig& cfg) {
  std::string dir = cfg.str("outdir");
  std::filesystem::create_directories(dir);
  return dir;
}

void write_config_header(std::ofstream& out, const RunConfig& cfg) {
  for (const auto& [k, v] : cfg.header()) out << "# " << k << '=' << v << '\n';
}

std::vector<int> hits_ks(const RunConfig& cfg, const std::vector<int>& def) {
  return cfg.ints_or("hits", def);
}

std::array<double, 3> split_ratios(const RunConfig& cfg) {
  return cfg.ratios_or("ratios", {0.8, 0.1, 0.1});
}

SplitBundle make_split(const KnowledgeGraph& g, const RunConfig& cfg) {
  if (cfg.has("split_dir")) return read_split(cfg.str("split_dir"));
  return split_disease_gene(g, cfg.str_or("dg_tag", "DG"), split_ratios(cfg),
                            cfg.u64_or("seed", 1));
}

// Drops train triples whose vocabulary is outside `g` (manifests computed on
// the full graph reused against a projection). Valid/test stay intact.
SplitBundle restrict_to_graph(SplitBundle bundle, const KnowledgeGraph& g) {
  std::vector<Triple> kept;
  for (auto& t : bundle.train)
    if (g.find_node(t.head) >= 0 && g.find_node(t.tail) >= 0 &&
        g.find_relation(t.relation) >= 0)
      kept.push_back(std::move(t));
  bundle.train = std::move(kept);
  return bundle;
}

// Candidate pool, filter and query sets for one (graph, split) pair; built
// once so the training eval hook stays cheap.
struct EvalContext {
  const KnowledgeGraph* g = nullptr;
  std::vector<std::int32_t> candidates;
  TripleSet filter;
  std::vector<IndexedTriple> valid_queries;
  std::vector<IndexedTriple> test_queries;
  std::string relation;
  std::vector<int> ks;

  MetricsReport run(const Model& m, const std::vector<IndexedTriple>& queries) const {
    return evaluate_queries(make_model_scorer(m, *g, relation), queries, candidates,
                            filter, ks, *g);
  }
  double valid_mp(const Model& m) const {
    return run(m, valid_queries).mean_percentile;
  }
};

EvalContext make_eval_context(const KnowledgeGraph& g, const SplitBundle& bundle,
                              const RunConfig& cfg, const std::vector<int>& ks) {
  EvalContext ctx;
  ctx.g = &g;
  ctx.candidates = g.nodes_of_type(cfg.str_or("gene_type", "gene"));
  if (ctx.candidates.empty()) throw Error("eval: no candidate genes in graph");
  std::vector<Triple> known = bundle.train;
  known.insert(known.end(), bundle.valid.begin(), bundle.valid.end());
  known.insert(known.end(), bundle.test.begin(), bundle.test.end());
  ctx.filter = TripleSet(g, known);
  for (const auto& t : bundle.valid) ctx.valid_queries.push_back(g.to_indexed(t));
  for (const auto& t : bundle.test) ctx.test_queries.push_back(g.to_indexed(t));
  if (!bundle.test.empty()) ctx.relation = bundle.test.front().relation;
  else if (!bundle.valid.empty()) ctx.relation = bundle.valid.front().relation;
  else ctx.relation = g.layer(cfg.str_or("dg_tag", "DG")).relation;
  ctx.ks = ks;
  return ctx;
}

// Thrown by the eval hook when a search trial is pruned mid-training.
struct TrainAborted {};

struct FitResult {
  Model model;
  TrainHistory history;
};

FitResult fit(const KnowledgeGraph& g, const SplitBundle& bundle, const TrainConfig& tcfg,
              const EvalContext& ctx, TrialReporter* reporter = nullptr,
              double* best_valid = nullptr) {
  double best = -1;
  int step = 0;
  EvalHook hook;
  if (!ctx.valid_queries.empty()) {
    hook = [&](const Model& m) {
      double mp = ctx.valid_mp(m);
      best = std::max(best, mp);
      if (reporter && reporter->report(step++, mp)) throw TrainAborted{};
      return mp;
    };
  }
  auto [model, history] = train(g, bundle, tcfg, hook);
  if (best_valid) *best_valid = best;
  return {std::move(model), std::move(history)};
}

void write_history_file(const TrainHistory& h, const std::string& path,
                        const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_config_header(out, cfg);
  out.close();
  // append the CSV body
  std::string tmp = path + ".body";
  write_history(h, tmp);
  std::ifstream body(tmp);
  std::ofstream app(path, std::ios::app);
  app << body.rdbuf();
  body.close();
  std::filesystem::remove(tmp);
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    ids.push_back(tab == std::string::npos ? line : line.substr(0, tab));
  }
  if (ids.empty()) throw Error("no ids in " + path);
  return ids;
}

void write_table(const std::string& path, const RunConfig& cfg,
                 const std::vector<std::string>& columns,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_config_header(out, cfg);
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

}  // namespace

KnowledgeGraph load_graph(const RunConfig& cfg) {
  auto tags = cfg.list_or("layers", {});
  if (tags.empty()) throw Error("config: 'layers' must list at least one layer tag");
  std::vector<RelationLayer> layers;
  for (const auto& tag : tags) {
    std::string base = "layer." + tag + ".";
    layers.push_back(load_layer(cfg.str(base + "path"), tag,
                                cfg.str_or(base + "relation", tag),
                                cfg.flag_or(base + "symmetric", false)));
  }
  return KnowledgeGraph::build(std::move(layers), load_node_types(cfg.str("node_types")));
}

TrainConfig make_train_config(const RunConfig& cfg) {
  TrainConfig t;
  t.dim = static_cast<int>(cfg.i64_or("dim", t.dim));
  t.gamma = cfg.dbl_or("gamma", t.gamma);
  t.negatives = static_cast<int>(cfg.i64_or("negatives", t.negatives));
  t.adv_alpha = cfg.dbl_or("adv_alpha", t.adv_alpha);
  t.lr = cfg.dbl_or("lr", t.lr);
  t.batch_size = static_cast<int>(cfg.i64_or("batch", t.batch_size));
  t.max_epochs = static_cast<int>(cfg.i64_or("epochs", t.max_epochs));
  t.patience = static_cast<int>(cfg.i64_or("patience", t.patience));
  t.eval_every = static_cast<int>(cfg.i64_or("eval_every", t.eval_every));
  t.seed = cfg.u64_or("seed", t.seed);
  t.weighted = cfg.flag_or("weighted", false);
  for (const auto& [k, v] : cfg.entries())
    if (k.rfind("weight.", 0) == 0) t.relation_weights[k.substr(7)] = std::stod(v);
  t.validate();
  return t;
}

Scorer make_model_scorer(const Model& model, const KnowledgeGraph& g,
                         const std::string& relation) {
  std::vector<std::int32_t> node_map(g.node_count());
  for (std::size_t i = 0; i < g.node_count(); ++i)
    node_map[i] = model.find_node(g.node_id(static_cast<std::int32_t>(i)));
  std::int32_t rel = model.find_relation(relation);
  if (rel < 0) throw Error("scorer: relation '" + relation + "' not in model");
  double w = model.relation_weight(rel);
  return [&model, rel, w, map = std::move(node_map)](std::int32_t d, std::int32_t c) {
    std::int32_t md = map[d], mc = map[c];
    if (md < 0 || mc < 0) throw Error("scorer: node not present in model");
    return w * model.distance(md, rel, mc);
  };
}

MetricsReport evaluate_split(const Model& model, const KnowledgeGraph& g,
                             const std::vector<Triple>& queries, const SplitBundle& bundle,
                             const RunConfig& cfg, const std::vector<int>& ks) {
  EvalContext ctx = make_eval_context(g, bundle, cfg, ks);
  std::vector<IndexedTriple> q;
  for (const auto& t : queries) q.push_back(g.to_indexed(t));
  return ctx.run(model, q);
}

SynthResult cmd_synth(const RunConfig& cfg) {
  SynthConfig sc;
  sc.diseases = static_cast<int>(cfg.i64_or("synth.diseases", sc.diseases));
  sc.genes = static_cast<int>(cfg.i64_or("synth.genes", sc.genes));
  sc.pathways = static_cast<int>(cfg.i64_or("synth.pathways", sc.pathways));
  sc.module_size = static_cast<int>(cfg.i64_or("synth.module_size", sc.module_size));
  sc.p_in = cfg.dbl_or("synth.p_in", sc.p_in);
  sc.p_out = cfg.dbl_or("synth.p_out", sc.p_out);
  sc.reveal = cfg.dbl_or("synth.reveal", sc.reveal);
  sc.noise_edges = static_cast<int>(cfg.i64_or("synth.noise_edges", sc.noise_edges));
  sc.seed = cfg.u64_or("synth.seed", cfg.u64_or("seed", sc.seed));
  SynthResult result = generate(sc);
  write_synth(result, sc, ensure_outdir(cfg));
  return result;
}

KnowledgeGraph cmd_ingest(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  std::string dir = ensure_outdir(cfg);
  std::ofstream out(dir + "/ingest_report.txt");
  if (!out) throw Error("cannot write " + dir + "/ingest_report.txt");
  write_config_header(out, cfg);
  for (const auto& layer : g.layers()) {
    const IngestStats& s = layer.stats;
    out << "layer " << layer.tag << ": relation=" << layer.relation
        << " symmetric=" << (layer.symmetric ? "true" : "false")
        << " rows_read=" << (s.lines - s.comments) << " parsed=" << s.parsed
        << " duplicates=" << s.duplicates << " malformed=" << s.malformed
        << " triples=" << layer.triples.size() << '\n';
  }
  out << "graph: nodes=" << g.node_count() << " relations=" << g.relation_count()
      << " triples=" << g.triple_count() << '\n';
  return g;
}

SplitBundle cmd_split(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  SplitBundle bundle = split_disease_gene(g, cfg.str_or("dg_tag", "DG"),
                                          split_ratios(cfg), cfg.u64_or("seed", 1));
  write_split(bundle, ensure_outdir(cfg));
  return bundle;
}

TrainResult cmd_train(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  SplitBundle bundle = make_split(g, cfg);
  TrainConfig tcfg = make_train_config(cfg);
  EvalContext ctx = make_eval_context(g, bundle, cfg, hits_ks(cfg, {30, 100}));
  FitResult r = fit(g, bundle, tcfg, ctx);
  std::string dir = ensure_outdir(cfg);
  r.model.save(dir + "/model.ckpt");
  write_history_file(r.history, dir + "/history.csv", cfg);
  return {std::move(r.model), std::move(r.history)};
}

MetricsReport cmd_eval(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  SplitBundle bundle = make_split(g, cfg);
  Model model = Model::load(cfg.str("checkpoint"));
  EvalContext ctx = make_eval_context(g, bundle, cfg, hits_ks(cfg, {30, 100}));
  MetricsReport report = ctx.run(model, ctx.test_queries);
  std::string dir = ensure_outdir(cfg);
  write_metrics_csv(report, dir + "/metrics.csv", cfg.header());
  write_per_query_tsv(report, dir + "/per_query.tsv");
  return report;
}

std::vector<AblateStage> cmd_ablate(const RunConfig& cfg) {
  KnowledgeGraph full = load_graph(cfg);
  auto tags = cfg.list_or("layers", {});
  std::string dg_tag = cfg.str_or("dg_tag", "DG");
  if (tags.empty() || tags.front() != dg_tag)
    throw Error("ablate: layer order must start with the disease-gene tag");
  auto ratios = split_ratios(cfg);
  std::uint64_t seed = cfg.u64_or("seed", 1);
  std::vector<int> ks = hits_ks(cfg, {30});
  TrainConfig tcfg = make_train_config(cfg);
  std::string dir = ensure_outdir(cfg);

  std::vector<AblateStage> stages;
  std::vector<Triple> reference_test;
  for (std::size_t i = 1; i <= tags.size(); ++i) {
    std::vector<std::string> prefix(tags.begin(), tags.begin() + i);
    KnowledgeGraph g = full.project(prefix);
    SplitBundle bundle = split_disease_gene(g, dg_tag, ratios, seed);
    if (i == 1) reference_test = bundle.test;
    else if (bundle.test != reference_test)
      throw Error("ablate: test split drifted between stages");
    EvalContext ctx = make_eval_context(g, bundle, cfg, ks);
    FitResult r = fit(g, bundle, tcfg, ctx);
    MetricsReport report = ctx.run(r.model, ctx.test_queries);

    std::string label;
    for (std::size_t j = 0; j < prefix.size(); ++j)
      label += (j ? " + " : "") + prefix[j];
    std::string stage_dir = dir + "/stage_" + std::to_string(i) + "_" + tags[i - 1];
    std::filesystem::create_directories(stage_dir);
    r.model.save(stage_dir + "/model.ckpt");
    write_history_file(r.history, stage_dir + "/history.csv", cfg);
    write_metrics_csv(report, stage_dir + "/metrics.csv", cfg.header());
    write_per_query_tsv(report, stage_dir + "/per_query.tsv");
    stages.push_back({label, std::move(report)});
  }

  std::vector<std::string> columns{"variant"};
  for (int k : ks) columns.push_back("hit@" + std::to_string(k));
  columns.insert(columns.end(), {"mean_rank", "mean_percentile"});
  for (int k : ks) columns.push_back("hit@" + std::to_string(k) + "_change_pct");
  columns.insert(columns.end(), {"mean_rank_change_pct", "mean_percentile_change_pct"});

  const MetricsReport& base = stages.front().metrics;
  std::vector<std::vector<std::string>> rows;
  for (const auto& stage : stages) {
    std::vector<std::string> row{stage.label};
    for (double h : stage.metrics.hit) row.push_back(fmt(h));
    row.push_back(fmt(stage.metrics.mean_rank));
    row.push_back(fmt(stage.metrics.mean_percentile));
    for (std::size_t j = 0; j < ks.size(); ++j)
      row.push_back(fmt(relative_change(base.hit[j], stage.metrics.hit[j],
                                        Direction::HigherIsBetter)));
    row.push_back(fmt(relative_change(base.mean_rank, stage.metrics.mean_rank,
                                      Direction::LowerIsBetter)));
    row.push_back(fmt(relative_change(base.mean_percentile, stage.metrics.mean_percentile,
                                      Direction::HigherIsBetter)));
    rows.push_back(std::move(row));
  }
  write_table(dir + "/ablate.csv", cfg, columns, rows);
  return stages;
}

CompareWeightedResult cmd_compare_weighted(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  std::string dg_tag = cfg.str_or("dg_tag", "DG");
  SplitBundle bundle = split_disease_gene(g, dg_tag, split_ratios(cfg),
                                          cfg.u64_or("seed", 1));
  std::vector<int> ks = hits_ks(cfg, {30});
  EvalContext ctx = make_eval_context(g, bundle, cfg, ks);
  std::string dir = ensure_outdir(cfg);

  // Original RotatE: unweighted loss, no search.
  TrainConfig torig = make_train_config(cfg);
  torig.weighted = false;
  torig.relation_weights.clear();
  FitResult orig = fit(g, bundle, torig, ctx);
  MetricsReport orig_report = ctx.run(orig.model, ctx.test_queries);
  std::filesystem::create_directories(dir + "/original");
  orig.model.save(dir + "/original/model.ckpt");
  write_history_file(orig.history, dir + "/original/history.csv", cfg);

  // Relation-weighted variant: per-relation weights searched on validation
  // MP, the disease-gene relation fixed at 1 as the reference scale.
  std::string dg_relation = g.layer(dg_tag).relation;
  double w_lo = cfg.dbl_or("search.w_lo", 1e-2);
  double w_hi = cfg.dbl_or("search.w_hi", 1e2);
  SearchSpace space;
  for (std::size_t r = 0; r < g.relation_count(); ++r) {
    std::string rel = g.relation_name(static_cast<std::int32_t>(r));
    if (rel == dg_relation) continue;
    space.params.emplace_back("weight." + rel, ParamDomain::real(w_lo, w_hi, true));
  }
  CompareWeightedResult result;
  TrainConfig tweighted = make_train_config(cfg);
  tweighted.weighted = true;
  tweighted.relation_weights.clear();
  tweighted.relation_weights[dg_relation] = 1.0;
  if (!space.params.empty()) {
    PrunerConfig pruner{static_cast<int>(cfg.i64_or("search.warmup", 5)),
                        static_cast<int>(cfg.i64_or("search.grace", 2))};
    Objective objective = [&](const Assignment& a, TrialReporter& reporter) {
      TrainConfig t = tweighted;
      for (const auto& [key, value] : a)
        t.relation_weights[key.substr(7)] = std::get<double>(value);
      double best_valid = -1;
      try {
        fit(g, bundle, t, ctx, &reporter, &best_valid);
      } catch (const TrainAborted&) {
      }
      return best_valid;
    };
    SearchResult sr = search(objective, space,
                             static_cast<int>(cfg.i64_or("search.trials", 12)),
                             cfg.u64_or("seed", 1), pruner);
    write_trial_log(sr.trials, dir + "/search_trials.csv", cfg.header());
    for (const auto& [key, value] : sr.best)
      tweighted.relation_weights[key.substr(7)] = std::get<double>(value);
  }
  result.best_weights = {tweighted.relation_weights.begin(), tweighted.relation_weights.end()};

  FitResult weighted = fit(g, bundle, tweighted, ctx);
  MetricsReport weighted_report = ctx.run(weighted.model, ctx.test_queries);
  std::filesystem::create_directories(dir + "/weighted");
  weighted.model.save(dir + "/weighted/model.ckpt");
  write_history_file(weighted.history, dir + "/weighted/history.csv", cfg);

  std::vector<std::string> columns{"variant"};
  for (int k : ks) columns.push_back("hit@" + std::to_string(k));
  columns.insert(columns.end(), {"mean_rank", "mean_percentile"});
  std::vector<std::vector<std::string>> rows;
  auto row_of = [&](const std::string& name, const MetricsReport& m) {
    std::vector<std::string> row{name};
    for (double h : m.hit) row.push_back(fmt(h));
    row.push_back(fmt(m.mean_rank));
    row.push_back(fmt(m.mean_percentile));
    return row;
  };
  rows.push_back(row_of("original", orig_report));
  rows.push_back(row_of("relation_weighted", weighted_report));
  write_table(dir + "/compare_weighted.csv", cfg, columns, rows);

  result.original = std::move(orig_report);
  result.weighted = std::move(weighted_report);
  return result;
}

std::vector<BaselineRow> cmd_baselines(const RunConfig& cfg) {
  KnowledgeGraph full = load_graph(cfg);
  std::string dg_tag = cfg.str_or("dg_tag", "DG");
  std::string pp_tag = cfg.str_or("pp_tag", "PP");
  std::string gene_type = cfg.str_or("gene_type", "gene");
  auto two_tags = cfg.list_or("baselines.layers", {dg_tag, pp_tag});
  KnowledgeGraph g = full.project(two_tags);
  SplitBundle bundle =
      cfg.has("split_dir")
          ? restrict_to_graph(read_split(cfg.str("split_dir")), g)
          : split_disease_gene(g, dg_tag, split_ratios(cfg), cfg.u64_or("seed", 1));
  std::vector<int> ks = hits_ks(cfg, {30, 100});
  EvalContext ctx = make_eval_context(g, bundle, cfg, ks);
  std::string dir = ensure_outdir(cfg);
  std::vector<std::string> warnings;

  // Model row on the identical split.
  TrainConfig tcfg = make_train_config(cfg);
  FitResult r = fit(g, bundle, tcfg, ctx);
  std::vector<BaselineRow> rows;
  rows.push_back(
      {tcfg.weighted ? "relation_weighted_rotate" : "rotate", ctx.run(r.model, ctx.test_queries), true});

  GeneNetwork net = GeneNetwork::from_graph(g, pp_tag, {gene_type});
  std::int32_t dg_rel = g.relation_index(ctx.relation);

  // Per-disease seeds = that disease's train-split genes present in the
  // network; diseases grouped in test order, processed by id.
  std::map<std::string, std::vector<std::int32_t>> seeds_by_disease;
  for (const auto& t : bundle.train) {
    if (t.relation != ctx.relation) continue;
    std::int32_t s = net.find(t.tail);
    if (s >= 0) seeds_by_disease[t.head].push_back(s);
  }
  std::map<std::string, std::vector<IndexedTriple>> queries_by_disease;
  for (const auto& q : ctx.test_queries) queries_by_disease[g.node_id(q.head)].push_back(q);

  double restart = cfg.dbl_or("rwr.restart", 0.3);
  double tol = cfg.dbl_or("rwr.tol", 1e-8);
  auto full_methods = cfg.list_or("baselines.full", {"neighborhood", "diamond", "rwr"});
  auto is_full = [&](const std::string& m) {
    return std::find(full_methods.begin(), full_methods.end(), m) != full_methods.end();
  };
  int max_k = *std::max_element(ks.begin(), ks.end());

  for (const std::string& method : {std::string("neighborhood"), std::string("diamond"),
                                    std::string("rwr")}) {
    bool full_rank = is_full(method);
    std::size_t limit = full_rank ? net.size() : static_cast<std::size_t>(max_k);
    std::vector<RankEntry> entries;
    for (const auto& [disease, queries] : queries_by_disease) {
      auto it = seeds_by_disease.find(disease);
      if (it == seeds_by_disease.end() || it->second.empty()) {
        warnings.push_back("disease " + disease + " has no usable seed genes; skipped");
        continue;
      }
      SeedSet seed{disease, it->second};
      std::vector<RankedGene> ranked;
      if (method == "neighborhood") ranked = neighborhood_rank(net, seed, limit);
      else if (method == "diamond") ranked = diamond_rank(net, seed, limit);
      else ranked = rwr_rank(net, seed, restart, tol);
      if (!full_rank && ranked.size() > limit) ranked.resize(limit);
      write_ranked_tsv(net, ranked, method == "rwr" ? "visit_frequency"
                                    : method == "diamond" ? "p_value"
                                                          : "score",
                       dir + "/ranked_" + method + "_" + disease + ".tsv");

      std::vector<std::int32_t> graph_ranked;
      for (const auto& rg : ranked) {
        std::int32_t idx = g.find_node(net.ids[rg.node]);
        if (idx >= 0 && g.node_type(idx) == gene_type) graph_ranked.push_back(idx);
      }
      for (const auto& q : queries) {
        RankingQuery query{q.head, q.rel, q.tail, &ctx.candidates, &ctx.filter};
        entries.push_back(rank_from_list(graph_ranked, query));
      }
    }
    if (entries.empty()) {
      warnings.push_back("method " + method + " produced no rankable queries");
      continue;
    }
    rows.push_back({method, aggregate(entries, ks), full_rank});
  }
  (void)dg_rel;

  std::vector<std::string> columns{"method"};
  for (int k : ks) columns.push_back("hit@" + std::to_string(k));
  columns.insert(columns.end(), {"mean_rank", "mean_percentile"});
  std::vector<std::vector<std::string>> table;
  for (const auto& row : rows) {
    std::vector<std::string> cells{row.method};
    for (double h : row.metrics.hit) cells.push_back(fmt(h));
    cells.push_back(row.ranked_fully ? fmt(row.metrics.mean_rank) : "NA");
    cells.push_back(row.ranked_fully ? fmt(row.metrics.mean_percentile) : "NA");
    table.push_back(std::move(cells));
  }
  {
    std::ofstream out(dir + "/baselines.csv");
    if (!out) throw Error("cannot write " + dir + "/baselines.csv");
    write_config_header(out, cfg);
    for (const auto& w : warnings) {
      out << "# warning: " << w << '\n';
      std::cerr << "warning: " << w << '\n';
    }
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    for (const auto& row : table)
      for (std::size_t i = 0; i < row.size(); ++i)
        out << row[i] << (i + 1 < row.size() ? "," : "\n");
  }
  return rows;
}

SearchResult cmd_search(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  SplitBundle bundle = make_split(g, cfg);
  EvalContext ctx = make_eval_context(g, bundle, cfg, hits_ks(cfg, {30}));
  std::string dir = ensure_outdir(cfg);

  SearchSpace space;
  const std::string prefix = "search.param.";
  for (const auto& [key, spec] : cfg.entries()) {
    if (key.rfind(prefix, 0) != 0) continue;
    std::string name = key.substr(prefix.size());
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= spec.size()) {
      std::size_t colon = spec.find(':', start);
      if (colon == std::string::npos) {
        parts.push_back(spec.substr(start));
        break;
      }
      parts.push_back(spec.substr(start, colon - start));
      start = colon + 1;
    }
    if (parts.size() < 2) throw Error("search: bad domain spec for " + name);
    if (parts[0] == "log" || parts[0] == "lin") {
      if (parts.size() != 3) throw Error("search: bad range for " + name);
      space.params.emplace_back(
          name, ParamDomain::real(std::stod(parts[1]), std::stod(parts[2]),
                                  parts[0] == "log"));
    } else if (parts[0] == "int") {
      if (parts.size() != 3) throw Error("search: bad range for " + name);
      space.params.emplace_back(name,
                                ParamDomain::integer(std::stoll(parts[1]), std::stoll(parts[2])));
    } else if (parts[0] == "cat") {
      space.params.emplace_back(
          name, ParamDomain::categorical({parts.begin() + 1, parts.end()}));
    } else {
      throw Error("search: unknown domain kind '" + parts[0] + "' for " + name);
    }
  }
  if (space.params.empty()) throw Error("search: no search.param.* entries in config");

  PrunerConfig pruner{static_cast<int>(cfg.i64_or("search.warmup", 5)),
                      static_cast<int>(cfg.i64_or("search.grace", 2))};
  Objective objective = [&](const Assignment& a, TrialReporter& reporter) {
    RunConfig trial_cfg = cfg;
    for (const auto& [key, value] : a) trial_cfg.set(key, to_string(value));
    TrainConfig t = make_train_config(trial_cfg);
    double best_valid = -1;
    try {
      fit(g, bundle, t, ctx, &reporter, &best_valid);
    } catch (const TrainAborted&) {
    }
    return best_valid;
  };
  SearchResult sr = search(objective, space, static_cast<int>(cfg.i64_or("search.trials", 20)),
                           cfg.u64_or("seed", 1), pruner);
  write_trial_log(sr.trials, dir + "/trials.csv", cfg.header());
  std::ofstream best(dir + "/best.conf");
  if (!best) throw Error("cannot write " + dir + "/best.conf");
  best << "# final_value=" << fmt(sr.best_value) << '\n';
  for (const auto& [key, value] : sr.best) best << key << '=' << to_string(value) << '\n';
  return sr;
}

ExternalResult cmd_external(const RunConfig& cfg) {
  KnowledgeGraph g = load_graph(cfg);
  std::string dg_tag = cfg.str_or("dg_tag", "DG");
  std::string gene_type = cfg.str_or("gene_type", "gene");
  SplitBundle bundle = make_split(g, cfg);
  std::string dir = ensure_outdir(cfg);

  std::vector<std::string> truth_ids = read_id_list(cfg.str("external.truth"));
  std::set<std::string> truth(truth_ids.begin(), truth_ids.end());
  if (cfg.flag_or("external.excise", false))
    bundle.train = excise_gene_leakage(g, bundle.train, truth_ids, gene_type);

  TrainConfig tcfg = make_train_config(cfg);
  EvalContext ctx = make_eval_context(g, bundle, cfg, hits_ks(cfg, {30}));
  FitResult r = fit(g, bundle, tcfg, ctx);
  r.model.save(dir + "/model.ckpt");

  std::string disease = cfg.str("external.disease");
  std::int32_t d = g.find_node(disease);
  if (d < 0) throw Error("external: unknown disease '" + disease + "'");
  Scorer scorer = make_model_scorer(r.model, g, ctx.relation);
  std::int32_t rel = g.relation_index(ctx.relation);
  TripleSet train_known(g, bundle.train);

  std::vector<std::pair<double, std::int32_t>> scored;
  for (std::int32_t c : ctx.candidates) {
    if (train_known.contains(d, rel, c)) continue;  // already-known links
    scored.emplace_back(scorer(d, c), c);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  int K = static_cast<int>(cfg.i64_or("external.K", 50));
  if (K > static_cast<int>(scored.size())) K = static_cast<int>(scored.size());
  ExternalResult result;
  {
    std::ofstream out(dir + "/predictions.tsv");
    if (!out) throw Error("cannot write " + dir + "/predictions.tsv");
    write_config_header(out, cfg);
    out << "# rank\tgene\tscore\n";
    for (int j = 0; j < K; ++j) {
      result.predictions.push_back(g.node_id(scored[j].second));
      out << (j + 1) << '\t' << result.predictions.back() << '\t' << fmt(scored[j].first)
          << '\n';
    }
  }
  result.model_curve = compare_external(result.predictions, truth, K);
  write_curve_csv(result.model_curve, dir + "/curve_model.csv", cfg.header());

  if (cfg.has("external.list")) {
    std::vector<std::string> ext = read_id_list(cfg.str("external.list"));
    if (static_cast<int>(ext.size()) < K)
      throw Error("external: comparison list shorter than K");
    result.external_curve = compare_external(ext, truth, K);
    write_curve_csv(*result.external_curve, dir + "/curve_external.csv", cfg.header());
  }
  return result;
}

}  // namespace kglp
