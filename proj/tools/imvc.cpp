// Command-line front end: synth, fit, predict, explain, eval, export-tree.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "imvc/dataio.hpp"
#include "imvc/metrics.hpp"
#include "imvc/pipeline.hpp"
#include "imvc/serialize.hpp"

namespace {

using namespace imvc;

std::vector<std::int64_t> widen(const std::vector<dtree::Label>& v) {
  return std::vector<std::int64_t>(v.begin(), v.end());
}

void print_report(std::ostream& os, const metrics::Report& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "purity=%.3f acc=%.3f f1=%.3f", r.purity, r.accuracy, r.f1);
  os << buf << '\n';
}

void write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable multi-view clustering"};
  app.require_subcommand(1);

  // synth
  dataio::SynthConfig synth;
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
  cmd_synth->add_option("--k", synth.k, "Number of clusters")->capture_default_str();
  cmd_synth->add_option("--views", synth.views, "Number of views")->capture_default_str();
  cmd_synth->add_option("--n", synth.n_per_cluster, "Instances per cluster")->capture_default_str();
  cmd_synth->add_option("--noise", synth.noise, "Per-coordinate noise std")->capture_default_str();
  cmd_synth->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  cmd_synth->add_option("--dims", synth.dims, "View dimensions (last repeats)")->delimiter(',');
  cmd_synth->add_option("--out", synth_out, "Output directory")->required();

  // fit
  pipeline::PipelineConfig cfg;
  cfg.k = 0;
  std::string fit_manifest, fit_out = "model.bin";
  auto* cmd_fit = app.add_subcommand("fit", "Train a model on a dataset manifest");
  cmd_fit->add_option("manifest", fit_manifest, "Dataset manifest JSON")->required()->check(CLI::ExistingFile);
  cmd_fit->add_option("--k", cfg.k, "Number of clusters")->required();
  cmd_fit->add_option("--e1", cfg.e1, "Pretraining epochs")->capture_default_str();
  cmd_fit->add_option("--e2", cfg.e2, "Joint training epochs per cycle")->capture_default_str();
  cmd_fit->add_option("--max-depth", cfg.max_depth, "Maximum tree depth")->capture_default_str();
  cmd_fit->add_option("--min-num", cfg.min_num, "Minimum instances to split a node")->capture_default_str();
  cmd_fit->add_option("--lambda", cfg.lambda, "Cross-entropy weight")->capture_default_str();
  cmd_fit->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
  cmd_fit->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  cmd_fit->add_option("--cycles", cfg.outer_cycles, "Maximum joint optimization cycles")->capture_default_str();
  cmd_fit->add_flag("--standardize", cfg.standardize, "z-score every view feature");
  cmd_fit->add_option("--out", fit_out, "Model output path")->capture_default_str();

  // predict
  std::string pred_model, pred_manifest, pred_out;
  auto* cmd_predict = app.add_subcommand("predict", "Assign clusters with a trained model");
  cmd_predict->add_option("model", pred_model)->required()->check(CLI::ExistingFile);
  cmd_predict->add_option("manifest", pred_manifest)->required()->check(CLI::ExistingFile);
  cmd_predict->add_option("--out", pred_out, "Labels CSV (stdout if omitted)");

  // explain
  std::string ex_model, ex_manifest;
  std::size_t ex_instance = 0;
  auto* cmd_explain = app.add_subcommand("explain", "Print the decision path of one instance");
  cmd_explain->add_option("model", ex_model)->required()->check(CLI::ExistingFile);
  cmd_explain->add_option("manifest", ex_manifest)->required()->check(CLI::ExistingFile);
  cmd_explain->add_option("--instance", ex_instance, "Row index")->required();

  // eval
  std::string ev_pred, ev_truth;
  auto* cmd_eval = app.add_subcommand("eval", "Compare two label files");
  cmd_eval->add_option("--pred", ev_pred)->required()->check(CLI::ExistingFile);
  cmd_eval->add_option("--truth", ev_truth)->required()->check(CLI::ExistingFile);

  // export-tree
  std::string et_model, et_format = "dot", et_out;
  auto* cmd_export = app.add_subcommand("export-tree", "Export the tree as DOT or JSON");
  cmd_export->add_option("model", et_model)->required()->check(CLI::ExistingFile);
  cmd_export->add_option("--format", et_format)->check(CLI::IsMember({"dot", "json"}))->capture_default_str();
  cmd_export->add_option("--out", et_out, "Output path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_synth) {
      const auto data = dataio::synth_multiview(synth);
      const auto manifest = dataio::write_dataset(data, synth_out);
      std::cout << "wrote " << manifest.string() << " (n=" << data.views.front().rows()
                << ", views=" << data.views.size() << ")\n";
    } else if (*cmd_fit) {
      const auto data = dataio::load_dataset(fit_manifest);
      const auto state = pipeline::fit(data.views, cfg);
      serialize::save_model(state, fit_out);
      std::cout << "cycles=" << state.cycles_run << " converged=" << (state.converged ? 1 : 0)
                << " tree_nodes=" << state.tree.size() << " leaves=" << state.tree.leaf_count()
                << " depth=" << state.tree.depth() << '\n';
      if (data.truth) print_report(std::cout, metrics::evaluate(widen(state.labels.hard), *data.truth));
    } else if (*cmd_predict) {
      const auto state = serialize::load_model(pred_model);
      const auto data = dataio::load_dataset(pred_manifest);
      const auto labels = widen(pipeline::predict(state, data.views));
      if (pred_out.empty()) {
        for (auto l : labels) std::cout << l << '\n';
      } else {
        dataio::write_labels(labels, pred_out);
      }
    } else if (*cmd_explain) {
      const auto state = serialize::load_model(ex_model);
      const auto data = dataio::load_dataset(ex_manifest);
      if (ex_instance >= data.views.front().rows())
        throw ConfigError("instance " + std::to_string(ex_instance) + " out of range");
      std::vector<std::vector<double>> inst;
      for (const auto& v : data.views) inst.emplace_back(v.row(ex_instance).begin(), v.row(ex_instance).end());
      const auto ex = pipeline::explain(state, inst);
      for (const auto& s : ex.path) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "V%zu[%zu] = %.6g %s %.6g -> %s\n", s.view + 1,
                      s.local_feature, s.value, s.went_left ? "<=" : ">", s.threshold,
                      s.went_left ? "left" : "right");
        std::cout << buf;
      }
      std::cout << "cluster " << ex.label << '\n';
    } else if (*cmd_eval) {
      const auto pred = dataio::read_labels(ev_pred);
      const auto truth = dataio::read_labels(ev_truth);
      print_report(std::cout, metrics::evaluate(pred, truth));
    } else if (*cmd_export) {
      const auto state = serialize::load_model(et_model);
      write_text(et_format == "dot" ? dataio::tree_to_dot(state.tree, state.view_dims)
                                    : dataio::tree_to_json(state.tree, state.view_dims) + "\n",
                 et_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
