#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contrastex/report/commands.hpp"

using namespace contrastex;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> settings;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "key=value or JSON parameter file");
    cmd->add_option("-s,--set", settings, "override a parameter, e.g. --set min_seg_size=62");
  }

  RunConfig resolve() const {
    RunConfig config = file.empty() ? RunConfig{} : load_config(file);
    for (const auto& s : settings) apply_setting(config, s);
    config.validate();
    return config;
  }
};

void print_summary(const EvaluationSummary& summary) {
  for (const auto& m : summary.methods) {
    std::cout << m.method << ": pointing game " << m.pointing.mean << " +/- " << m.pointing.half_width << ", IoU "
              << m.iou.mean << " +/- " << m.iou.half_width << " (n=" << m.pointing.n << ")\n";
  }
  if (!summary.skipped.empty()) std::cout << summary.skipped.size() << " image(s) skipped\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive counterfactual explanations for image classifiers"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::string gen_out;
  auto* generate = app.add_subcommand("generate", "write a synthetic shape dataset");
  generate->add_option("-n,--count", gen.count, "number of image pairs")->default_val(100);
  generate->add_option("--seed", gen.seed, "random seed")->default_val(0);
  generate->add_option("--ratio", gen.disease_ratio, "fraction of diseased items")->default_val(0.5);
  generate->add_option("--width", gen.width)->default_val(128);
  generate->add_option("--height", gen.height)->default_val(128);
  generate->add_option("-o,--output", gen_out, "output directory")->required();

  TrainOptions train;
  std::string train_dataset, train_out, train_model = "mlp";
  auto* train_cmd = app.add_subcommand("train", "train the desk classifier");
  train_cmd->add_option("-d,--dataset", train_dataset, "dataset directory (default: generate one)");
  train_cmd->add_option("-n,--count", train.generate_count, "images to generate when no dataset is given")->default_val(2000);
  train_cmd->add_option("--seed", train.seed)->default_val(0);
  train_cmd->add_option("--validation", train.validation_fraction, "validation fraction")->default_val(0.2);
  train_cmd->add_option("--model", train_model, "mlp or logistic")->check(CLI::IsMember({"mlp", "logistic"}));
  train_cmd->add_option("--epochs", train.training.epochs)->default_val(train.training.epochs);
  train_cmd->add_option("--hidden", train.training.hidden_units)->default_val(train.training.hidden_units);
  train_cmd->add_option("-o,--output", train_out, "model file (JSON)")->required();

  ConfigArgs explain_cfg;
  ExplainPaths explain_paths;
  std::string ex_x, ex_xp, ex_out;
  auto* explain_cmd = app.add_subcommand("explain", "explain one image against its contrast image");
  explain_cfg.attach(explain_cmd);
  explain_cmd->add_option("-x,--image", ex_x, "image to explain")->required();
  explain_cmd->add_option("-p,--contrast", ex_xp, "contrast image")->required();
  explain_cmd->add_option("-m,--classifier", explain_paths.classifier, "desk:<model.json> or subprocess:<command>")->required();
  explain_cmd->add_option("-o,--output", ex_out, "output directory")->required();

  ConfigArgs eval_cfg;
  EvaluateOptions eval;
  std::string eval_dataset, eval_classifier, eval_saliency, eval_out;
  auto add_eval_options = [&](CLI::App* cmd) {
    eval_cfg.attach(cmd);
    cmd->add_option("-d,--dataset", eval_dataset, "annotated dataset directory")->required();
    auto* m = cmd->add_option("-m,--classifier", eval_classifier, "explain each image with this classifier");
    auto* s = cmd->add_option("--saliency", eval_saliency, "directory of <id>_saliency.{json,png} maps");
    m->excludes(s);
    cmd->add_option("-o,--output", eval_out, "output directory")->required();
  };
  auto* evaluate = app.add_subcommand("evaluate", "pointing game and IoU over a dataset");
  add_eval_options(evaluate);
  auto* sweep = app.add_subcommand("sweep", "IoU across intensity thresholds");
  add_eval_options(sweep);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*generate) {
      gen.output = gen_out;
      cmd_generate(gen);
      std::cout << "wrote " << gen.count << " pairs to " << gen_out << "\n";
    } else if (*train_cmd) {
      if (!train_dataset.empty()) train.dataset = train_dataset;
      train.training.model = train_model == "logistic" ? DeskModel::Logistic : DeskModel::Mlp;
      train.output = train_out;
      const auto report = cmd_train(train);
      std::cout << "validation accuracy " << report.validation_accuracy << " (train " << report.train_accuracy << ")\n";
    } else if (*explain_cmd) {
      explain_paths.x = ex_x;
      explain_paths.x_prime = ex_xp;
      explain_paths.output = ex_out;
      const auto written = cmd_explain(explain_cfg.resolve(), explain_paths);
      for (const auto& p : written.all()) std::cout << p.string() << "\n";
    } else if (*evaluate || *sweep) {
      eval.dataset = eval_dataset;
      if (!eval_classifier.empty()) eval.classifier = eval_classifier;
      if (!eval_saliency.empty()) eval.saliency_dir = eval_saliency;
      eval.output = eval_out;
      const auto config = eval_cfg.resolve();
      print_summary(*evaluate ? cmd_evaluate(config, eval) : cmd_sweep(config, eval));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
