#include "kglp/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "kglp/error.hpp"
#include "kglp/rng.hpp"

namespace kglp {

namespace {

std::string gene_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "g%04d", i);
  return buf;
}
std::string disease_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "d%02d", i);
  return buf;
}
std::string pathway_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%03d", i);
  return buf;
}

}  // namespace

void SynthConfig::validate() const {
  if (diseases < 1 || genes < 1 || pathways < 1)
    throw Error("synth: counts must be positive");
  if (diseases > 64) throw Error("synth: at most 64 diseases supported");
  if (module_size < 1) throw Error("synth: module_size must be positive");
  if (module_size > genes) throw Error("synth: module size exceeds gene count");
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1 || reveal < 0 || reveal > 1)
    throw Error("synth: probabilities must be in [0, 1]");
  if (p_in < p_out) throw Error("synth: p_in must be >= p_out");
  if (noise_edges < 0) throw Error("synth: noise_edges must be >= 0");
  if (noise_edges > static_cast<long long>(pathways) * genes)
    throw Error("synth: noise_edges exceeds possible pathway-gene pairs");
}

SynthResult generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng root(cfg.seed);

  const int hubs_per_disease = std::max(1, cfg.module_size / 6);
  const long long genes_needed =
      static_cast<long long>(cfg.diseases) * (cfg.module_size + hubs_per_disease);
  if (genes_needed > cfg.genes)
    throw Error("synth: module size exceeds gene count (need " +
                std::to_string(genes_needed) + " genes, have " +
                std::to_string(cfg.genes) + ")");

  std::vector<int> order(cfg.genes);
  std::iota(order.begin(), order.end(), 0);
  Rng module_rng = root.stream("modules");
  module_rng.shuffle(order);

  // Disjoint modules carved from the shuffled gene order.
  std::vector<std::vector<int>> module_of(cfg.diseases);
  std::vector<std::uint64_t> membership(cfg.genes, 0);
  int cursor = 0;
  for (int d = 0; d < cfg.diseases; ++d) {
    for (int j = 0; j < cfg.module_size; ++j) module_of[d].push_back(order[cursor++]);
    for (int g : module_of[d]) membership[g] |= (1ULL << d);
  }

  // Disease-gene layer, part 1: each module member revealed with probability
  // `reveal` (at least one per module so every disease enters the layer).
  Rng reveal_rng = root.stream("reveal");
  std::vector<std::pair<std::string, std::string>> dg_edges;
  std::vector<std::vector<int>> revealed_of(cfg.diseases);
  SynthResult result;
  for (int d = 0; d < cfg.diseases; ++d) {
    std::vector<bool> revealed(module_of[d].size());
    bool any = false;
    for (std::size_t j = 0; j < module_of[d].size(); ++j) {
      revealed[j] = reveal_rng.bernoulli(cfg.reveal);
      any = any || revealed[j];
    }
    if (!any) revealed[0] = true;
    for (std::size_t j = 0; j < module_of[d].size(); ++j) {
      int g = module_of[d][j];
      if (revealed[j]) {
        dg_edges.emplace_back(disease_id(d), gene_id(g));
        revealed_of[d].push_back(g);
      }
      result.truth.push_back({disease_id(d), gene_id(g), revealed[j]});
    }
  }

  // Part 2: broadly pleiotropic hub genes outside every module, linked to
  // every disease. Their held-out edges are recoverable from relation
  // co-occurrence (the other links stay in train and the filtered protocol
  // removes competing hubs) while staying invisible to pure network
  // proximity: hub protein wiring is background-only.
  for (int d = 0; d < cfg.diseases; ++d) {
    for (int j = 0; j < hubs_per_disease; ++j) {
      int g = order[cursor++];
      for (int dd = 0; dd < cfg.diseases; ++dd)
        dg_edges.emplace_back(disease_id(dd), gene_id(g));
    }
  }

  // Part 3: cross-disease associations onto a small pleiotropic subset of
  // each module's revealed genes, from the two ring-predecessor diseases.
  // These second links free module edges for the valid/test splits.
  Rng cross_rng = root.stream("cross");
  const int cross_per_module = std::max(1, cfg.module_size / 2);
  for (int target = 0; target < cfg.diseases; ++target) {
    std::vector<int> picks = revealed_of[target];
    cross_rng.shuffle(picks);
    int take = std::min<int>(cross_per_module, static_cast<int>(picks.size()));
    for (int offset = 1; offset <= 2 && offset < cfg.diseases; ++offset) {
      int d = (target - offset + cfg.diseases) % cfg.diseases;
      for (int j = 0; j < take; ++j)
        dg_edges.emplace_back(disease_id(d), gene_id(picks[j]));
    }
  }

  // Protein-protein layer over all gene pairs.
  Rng pp_rng = root.stream("ppi");
  std::vector<std::pair<std::string, std::string>> pp_edges;
  for (int i = 0; i < cfg.genes; ++i) {
    for (int j = i + 1; j < cfg.genes; ++j) {
      bool in_module = (membership[i] & membership[j]) != 0;
      double p = in_module ? cfg.p_in : cfg.p_out;
      if (pp_rng.bernoulli(p)) pp_edges.emplace_back(gene_id(i), gene_id(j));
    }
  }

  // Noise layer: distinct random pathway->gene edges.
  Rng noise_rng = root.stream("noise");
  std::vector<std::pair<std::string, std::string>> noise_edges;
  std::set<std::pair<int, int>> seen;
  while (static_cast<int>(noise_edges.size()) < cfg.noise_edges) {
    int p = static_cast<int>(noise_rng.index(cfg.pathways));
    int g = static_cast<int>(noise_rng.index(cfg.genes));
    if (seen.emplace(p, g).second) noise_edges.emplace_back(pathway_id(p), gene_id(g));
  }

  result.layers.push_back(make_layer(cfg.dg_tag, "disease_gene", false, dg_edges));
  result.layers.push_back(make_layer(cfg.pp_tag, "ppi", true, pp_edges));
  if (cfg.noise_edges > 0)
    result.layers.push_back(make_layer(cfg.noise_tag, "noise_link", false, noise_edges));

  for (int d = 0; d < cfg.diseases; ++d) result.node_types.emplace(disease_id(d), "disease");
  for (int g = 0; g < cfg.genes; ++g) result.node_types.emplace(gene_id(g), "gene");
  for (int p = 0; p < cfg.pathways; ++p) result.node_types.emplace(pathway_id(p), "pathway");

  result.graph = KnowledgeGraph::build(result.layers, result.node_types);

  // Realized signal of held-out genes: intra-module vs background PP degree.
  std::vector<std::set<int>> adj(cfg.genes);
  std::unordered_map<std::string, int> gene_no;
  for (int g = 0; g < cfg.genes; ++g) gene_no.emplace(gene_id(g), g);
  for (const auto& [a, b] : pp_edges) {
    adj[gene_no[a]].insert(gene_no[b]);
    adj[gene_no[b]].insert(gene_no[a]);
  }
  double intra_sum = 0, background_sum = 0;
  std::size_t held_out = 0;
  for (const auto& row : result.truth) {
    if (row.revealed) continue;
    ++held_out;
    int d = std::stoi(row.disease.substr(1));
    int g = gene_no[row.gene];
    std::set<int> module(module_of[d].begin(), module_of[d].end());
    for (int nb : adj[g]) {
      if (module.count(nb)) intra_sum += 1;
      else background_sum += 1;
    }
  }
  if (held_out > 0 && background_sum > 0) result.signal_ratio = intra_sum / background_sum;
  else if (held_out > 0) result.signal_ratio = intra_sum > 0 ? 1e300 : 0;
  return result;
}

namespace {

void write_edge_file(const std::string& path, const SynthConfig& cfg,
                     const RelationLayer& layer, bool directed_only) {
  std::ofstream out(path);
  if (!out) throw Error("write_synth: cannot write " + path);
  out << "# layer=" << layer.tag << " relation=" << layer.relation
      << " symmetric=" << (layer.symmetric ? "true" : "false") << '\n';
  out << "# seed=" << cfg.seed << '\n';
  std::set<std::pair<std::string, std::string>> emitted;
  for (const auto& t : layer.triples) {
    if (directed_only) {
      // one row per undirected edge; ingestion re-closes the symmetry
      auto key = t.head < t.tail ? std::make_pair(t.head, t.tail)
                                 : std::make_pair(t.tail, t.head);
      if (!emitted.insert(key).second) continue;
      out << key.first << '\t' << key.second << '\n';
    } else {
      out << t.head << '\t' << t.tail << '\n';
    }
  }
}

}  // namespace

void write_synth(const SynthResult& result, const SynthConfig& cfg,
                 const std::string& outdir) {
  std::filesystem::create_directories(outdir);

  auto config_header = [&](std::ofstream& out) {
    out << "# diseases=" << cfg.diseases << " genes=" << cfg.genes
        << " pathways=" << cfg.pathways << " module_size=" << cfg.module_size << '\n';
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# p_in=%.10g p_out=%.10g reveal=%.10g", cfg.p_in,
                  cfg.p_out, cfg.reveal);
    out << buf << '\n'
        << "# noise_edges=" << cfg.noise_edges << " seed=" << cfg.seed << '\n';
  };

  for (const auto& layer : result.layers) {
    std::string name = layer.tag == cfg.dg_tag    ? "dg.tsv"
                       : layer.tag == cfg.pp_tag  ? "ppi.tsv"
                                                  : "noise.tsv";
    write_edge_file(outdir + "/" + name, cfg, layer, layer.symmetric);
  }

  std::ofstream types(outdir + "/node_types.tsv");
  if (!types) throw Error("write_synth: cannot write node_types.tsv");
  config_header(types);
  std::vector<std::pair<std::string, std::string>> sorted(result.node_types.begin(),
                                                          result.node_types.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [id, type] : sorted) types << id << '\t' << type << '\n';

  std::ofstream truth(outdir + "/truth.tsv");
  if (!truth) throw Error("write_synth: cannot write truth.tsv");
  config_header(truth);
  for (const auto& row : result.truth)
    truth << row.disease << '\t' << row.gene << '\t'
          << (row.revealed ? "revealed" : "held_out") << '\n';

  std::ofstream conf(outdir + "/synth.conf");
  if (!conf) throw Error("write_synth: cannot write synth.conf");
  conf << "layers=" << cfg.dg_tag << ',' << cfg.pp_tag;
  if (cfg.noise_edges > 0) conf << ',' << cfg.noise_tag;
  conf << '\n';
  conf << "layer." << cfg.dg_tag << ".path=" << outdir << "/dg.tsv\n";
  conf << "layer." << cfg.dg_tag << ".relation=disease_gene\n";
  conf << "layer." << cfg.dg_tag << ".symmetric=false\n";
  conf << "layer." << cfg.pp_tag << ".path=" << outdir << "/ppi.tsv\n";
  conf << "layer." << cfg.pp_tag << ".relation=ppi\n";
  conf << "layer." << cfg.pp_tag << ".symmetric=true\n";
  if (cfg.noise_edges > 0) {
    conf << "layer." << cfg.noise_tag << ".path=" << outdir << "/noise.tsv\n";
    conf << "layer." << cfg.noise_tag << ".relation=noise_link\n";
    conf << "layer." << cfg.noise_tag << ".symmetric=false\n";
  }
  conf << "node_types=" << outdir << "/node_types.tsv\n";
  conf << "dg_tag=" << cfg.dg_tag << "\n";
  conf << "gene_type=gene\n";
}

}  // namespace kglp
