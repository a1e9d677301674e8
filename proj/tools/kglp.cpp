#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kglp/driver.hpp"
#include "kglp/error.hpp"

namespace {

struct Args {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string outdir;
};

void add_common(CLI::App* sub, Args& args) {
  sub->add_option("-c,--config", args.config_path, "flat key=value config file");
  sub->add_option("-s,--set", args.overrides, "override config entries (key=value, wins)");
  sub->add_option("-o,--outdir", args.outdir, "output directory (same as --set outdir=...)");
}

kglp::RunConfig resolve(const Args& args) {
  kglp::RunConfig cfg;
  if (!args.config_path.empty()) cfg = kglp::RunConfig::from_file(args.config_path);
  for (const auto& kv : args.overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw kglp::Error("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!args.outdir.empty()) cfg.set("outdir", args.outdir);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kglp: disease-gene link prediction over heterogeneous knowledge graphs"};
  app.require_subcommand(1);
  Args args;

  struct Cmd {
    const char* name;
    const char* help;
    void (*run)(const kglp::RunConfig&);
  };
  const std::vector<Cmd> cmds = {
      {"synth", "generate a synthetic multi-layer graph with planted disease modules",
       [](const kglp::RunConfig& c) { kglp::cmd_synth(c); }},
      {"ingest", "load layer TSVs, build the graph, write an ingestion report",
       [](const kglp::RunConfig& c) { kglp::cmd_ingest(c); }},
      {"split", "split the disease-gene layer into train/valid/test",
       [](const kglp::RunConfig& c) { kglp::cmd_split(c); }},
      {"train", "train the rotation model, save checkpoint and history",
       [](const kglp::RunConfig& c) { kglp::cmd_train(c); }},
      {"eval", "evaluate a checkpoint on the test split (filtered metrics)",
       [](const kglp::RunConfig& c) { kglp::cmd_eval(c); }},
      {"ablate", "train/evaluate over cumulative layer prefixes",
       [](const kglp::RunConfig& c) { kglp::cmd_ablate(c); }},
      {"compare-weighted", "original vs relation-weighted model on identical splits",
       [](const kglp::RunConfig& c) { kglp::cmd_compare_weighted(c); }},
      {"baselines", "neighborhood / DIAMOnD / random-walk baselines plus the model",
       [](const kglp::RunConfig& c) { kglp::cmd_baselines(c); }},
      {"search", "random hyperparameter search with median pruning",
       [](const kglp::RunConfig& c) { kglp::cmd_search(c); }},
      {"external", "top-K predictions vs an external truth list (curves)",
       [](const kglp::RunConfig& c) { kglp::cmd_external(c); }},
  };
  for (const auto& cmd : cmds) add_common(app.add_subcommand(cmd.name, cmd.help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    kglp::RunConfig cfg = resolve(args);
    for (const auto& cmd : cmds) {
      if (app.got_subcommand(cmd.name)) {
        cmd.run(cfg);
        return 0;
      }
    }
    std::cerr << "kglp: no subcommand selected\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kglp: " << e.what() << '\n';
    return 1;
  }
}
