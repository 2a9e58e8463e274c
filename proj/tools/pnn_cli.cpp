// Command-line front end: generate -> train -> gridsearch -> evaluate -> gpr
// -> report, with config files, reproducible seeds, and manifest output.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnn/csv.hpp"
#include "pnn/dataset.hpp"
#include "pnn/gpr.hpp"
#include "pnn/metrics.hpp"
#include "pnn/modelsel.hpp"
#include "pnn/net.hpp"
#include "pnn/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

fs::path default_out_root() {
  if (const char* env = std::getenv("PNN_OUT_ROOT")) return fs::path(env);
  return fs::path("runs");
}

fs::path prepare_out_dir(const std::string& out_flag, const std::string& command) {
  fs::path dir = out_flag.empty() ? default_out_root() / command : fs::path(out_flag);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw pnn::IoError("cannot create output directory " + dir.string());
  return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const json& options,
                    const std::vector<std::string>& outputs) {
  json j;
  j["command"] = command;
  j["options"] = options;
  j["outputs"] = outputs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw pnn::IoError("cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

std::vector<double> parse_double_list(const std::vector<double>& v, const char* name) {
  if (v.empty()) throw pnn::DomainError(std::string(name) + ": empty list");
  return v;
}

struct GenerateOptions {
  std::string benchmark;
  std::uint64_t seed = 0;
  std::size_t train_unique = 0;  // 0 = benchmark default
  std::size_t test_unique = 0;
  std::size_t replicates = 10;
  double ishigami_a = 7.0;
  double ishigami_b = 0.1;
  std::string out;
};

int cmd_generate(const GenerateOptions& opt) {
  pnn::Dataset train_set;
  pnn::Dataset test_set;
  if (opt.benchmark == "cubic") {
    pnn::CubicSpec train_spec{opt.train_unique ? opt.train_unique : 100, opt.replicates,
                              pnn::Rng(opt.seed).split(0).seed()};
    pnn::CubicSpec test_spec{opt.test_unique ? opt.test_unique : 50, opt.replicates,
                             pnn::Rng(opt.seed).split(1).seed()};
    train_set = pnn::gen_cubic(train_spec);
    test_set = pnn::gen_cubic(test_spec);
  } else if (opt.benchmark == "ishigami") {
    pnn::IshigamiSpec train_spec{opt.ishigami_a, opt.ishigami_b,
                                 opt.train_unique ? opt.train_unique : 300, opt.replicates,
                                 pnn::Rng(opt.seed).split(0).seed()};
    pnn::IshigamiSpec test_spec{opt.ishigami_a, opt.ishigami_b,
                                opt.test_unique ? opt.test_unique : 100, opt.replicates,
                                pnn::Rng(opt.seed).split(1).seed()};
    train_set = pnn::gen_ishigami(train_spec);
    test_set = pnn::gen_ishigami(test_spec);
  } else {
    throw pnn::DomainError("generate: unknown benchmark '" + opt.benchmark + "'");
  }
  const fs::path dir = prepare_out_dir(opt.out, "generate");
  pnn::write_csv(train_set, dir / "train.csv");
  pnn::write_csv(test_set, dir / "test.csv");
  write_manifest(dir, "generate",
                 {{"benchmark", opt.benchmark},
                  {"seed", opt.seed},
                  {"train_unique", opt.train_unique},
                  {"test_unique", opt.test_unique},
                  {"replicates", opt.replicates},
                  {"ishigami_a", opt.ishigami_a},
                  {"ishigami_b", opt.ishigami_b}},
                 {"train.csv", "test.csv"});
  std::cout << "wrote " << (dir / "train.csv").string() << " (" << train_set.size()
            << " rows), " << (dir / "test.csv").string() << " (" << test_set.size()
            << " rows)\n";
  return kExitOk;
}

struct TrainOptions {
  std::string train_csv;
  std::size_t depth = 4;
  std::size_t width = 6;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::string loss = "nll";
  double learning_rate = 0.001;
  double decay = 0.9;
  double epsilon = 1e-7;
  double variance_floor = 1e-6;
  std::uint64_t seed = 0;
  bool standardize = false;
  std::string out;
};

int cmd_train(const TrainOptions& opt) {
  pnn::Dataset train_set = pnn::load_csv(opt.train_csv, pnn::GroupMode::Column);
  pnn::Standardizer st;
  if (opt.standardize) {
    st = pnn::fit_standardizer(train_set);
    train_set = pnn::apply_standardizer(st, train_set);
  }

  pnn::Architecture arch;
  arch.input_dim = train_set.input_dim();
  arch.depth = opt.depth;
  arch.width = opt.width;
  arch.variance_floor = opt.variance_floor;

  pnn::TrainConfig tc;
  tc.batch_size = opt.batch_size;
  tc.epochs = opt.epochs;
  if (opt.loss == "nll") {
    tc.loss = pnn::LossKind::HeteroscedasticNll;
  } else if (opt.loss == "mse") {
    tc.loss = pnn::LossKind::Mse;
  } else {
    throw pnn::DomainError("train: unknown loss '" + opt.loss + "'");
  }
  pnn::OptimizerConfig oc{opt.learning_rate, opt.decay, opt.epsilon};

  pnn::FitResult fitted = pnn::fit(train_set, arch, tc, oc, pnn::Rng(opt.seed));

  const fs::path dir = prepare_out_dir(opt.out, "train");
  pnn::Checkpoint ck{arch, std::move(fitted.params), opt.seed, opt.standardize,
                     st.means, st.stds};
  pnn::save_checkpoint(ck, dir / "checkpoint.json");
  pnn::write_loss_history_csv(fitted.epoch_loss, dir / "loss.csv");
  write_manifest(dir, "train",
                 {{"train_csv", opt.train_csv},
                  {"depth", opt.depth},
                  {"width", opt.width},
                  {"epochs", opt.epochs},
                  {"batch_size", opt.batch_size},
                  {"loss", opt.loss},
                  {"learning_rate", opt.learning_rate},
                  {"decay", opt.decay},
                  {"epsilon", opt.epsilon},
                  {"variance_floor", opt.variance_floor},
                  {"standardize", opt.standardize},
                  {"seed", opt.seed}},
                 {"checkpoint.json", "loss.csv"});
  std::cout << "final epoch loss " << pnn::format_double(fitted.epoch_loss.back())
            << ", checkpoint at " << (dir / "checkpoint.json").string() << "\n";
  return kExitOk;
}

struct GridOptions {
  std::string train_csv;
  std::string test_csv;
  std::vector<std::size_t> depths{1, 2, 3, 4};
  std::vector<std::size_t> widths{2, 4, 6, 8};
  std::size_t seeds_per_cell = 1;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;
  std::string out;
};

int cmd_gridsearch(const GridOptions& opt) {
  const pnn::Dataset train_set = pnn::load_csv(opt.train_csv, pnn::GroupMode::Column);
  const pnn::Dataset test_set = pnn::load_csv(opt.test_csv, pnn::GroupMode::Column);

  pnn::GridSpec spec{opt.depths, opt.widths, opt.seeds_per_cell};
  pnn::TrainConfig tc;
  tc.batch_size = opt.batch_size;
  tc.epochs = opt.epochs;
  pnn::OptimizerConfig oc;
  pnn::Architecture base;
  base.input_dim = train_set.input_dim();

  const pnn::GridResult result = pnn::grid_search(train_set, test_set, spec, tc, oc,
                                                  pnn::Rng(opt.seed), base, opt.jobs);

  const fs::path dir = prepare_out_dir(opt.out, "gridsearch");
  pnn::write_grid_csv(result, dir / "grid.csv");
  pnn::write_grid_timings_csv(result, dir / "grid_timings.csv");
  const pnn::GridCell& best = result.cells[result.best_cell_index];
  pnn::Architecture best_arch = base;
  best_arch.depth = best.depth;
  best_arch.width = best.width;
  pnn::save_checkpoint({best_arch, best.params, opt.seed, false, {}, {}},
                       dir / "best_checkpoint.json");
  write_manifest(dir, "gridsearch",
                 {{"train_csv", opt.train_csv},
                  {"test_csv", opt.test_csv},
                  {"depths", opt.depths},
                  {"widths", opt.widths},
                  {"seeds_per_cell", opt.seeds_per_cell},
                  {"epochs", opt.epochs},
                  {"batch_size", opt.batch_size},
                  {"seed", opt.seed}},
                 {"grid.csv", "grid_timings.csv", "best_checkpoint.json"});
  std::cout << "best cell depth " << result.best_depth << " width " << result.best_width
            << " kl " << pnn::format_double(result.best_kl) << "\n";
  return kExitOk;
}

struct EvaluateOptions {
  std::string checkpoint;
  std::string test_csv;
  std::string out;
};

int cmd_evaluate(const EvaluateOptions& opt) {
  const pnn::Dataset test_set = pnn::load_csv(opt.test_csv, pnn::GroupMode::Column);
  const pnn::EmpiricalStats emp = pnn::group_replicates(test_set);

  std::ifstream peek(opt.checkpoint);
  if (!peek) throw pnn::IoError("evaluate: cannot open " + opt.checkpoint);
  json header;
  try {
    peek >> header;
  } catch (const json::exception& e) {
    throw pnn::IoError("evaluate: invalid checkpoint JSON: " + std::string(e.what()));
  }
  const std::string format = header.value("format", "");

  std::vector<pnn::GaussianPrediction> preds;
  preds.reserve(emp.groups.size());
  if (format == "pnn-checkpoint") {
    const pnn::Checkpoint ck = pnn::load_checkpoint(opt.checkpoint);
    pnn::Standardizer st{ck.standardize_means, ck.standardize_stds};
    for (const auto& g : emp.groups) {
      pnn::Vector x = g.input;
      if (ck.standardized) {
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - st.means[j]) / st.stds[j];
      }
      preds.push_back(pnn::forward(ck.params, ck.arch, x));
    }
  } else if (format == "gpr-checkpoint") {
    pnn::GprConfig cfg;
    cfg.length_scale = header.at("length_scale").get<double>();
    cfg.noise_variance = header.at("noise_variance").get<double>();
    const std::string train_csv = header.at("train_csv").get<std::string>();
    const pnn::Dataset train_set = pnn::load_csv(train_csv, pnn::GroupMode::Column);
    const pnn::GprModel model = pnn::gpr_fit(train_set, cfg);
    for (const auto& g : emp.groups) {
      pnn::GaussianPrediction p = pnn::gpr_predict(model, g.input);
      if (!(p.variance > 0.0)) p.variance = pnn::kGprJitter;
      preds.push_back(p);
    }
  } else {
    throw pnn::IoError("evaluate: unrecognized checkpoint format in " + opt.checkpoint);
  }

  const pnn::EvalReport report = pnn::evaluate(preds, emp);
  const fs::path dir = prepare_out_dir(opt.out, "evaluate");
  pnn::write_report_json(report, dir / "report.json");
  pnn::write_scatter_csvs(report, dir / "scatter_mean.csv", dir / "scatter_interval.csv");
  write_manifest(dir, "evaluate",
                 {{"checkpoint", opt.checkpoint}, {"test_csv", opt.test_csv}},
                 {"report.json", "scatter_mean.csv", "scatter_interval.csv"});
  std::cout << "r_squared " << pnn::format_double(report.r_squared)
            << " interval_correlation " << pnn::format_double(report.interval_correlation)
            << " mean_kl " << pnn::format_double(report.mean_kl) << "\n";
  return kExitOk;
}

struct GprOptions {
  std::string train_csv;
  std::string test_csv;
  std::vector<double> length_scale_bounds{0.01, 0.1, 1.0, 10.0};
  std::vector<double> noise_grid{1e-4, 1e-2, 0.1, 1.0, 10.0};
  std::size_t jobs = 0;
  std::string out;
};

int cmd_gpr(const GprOptions& opt) {
  const pnn::Dataset train_set = pnn::load_csv(opt.train_csv, pnn::GroupMode::Column);
  const pnn::Dataset test_set = pnn::load_csv(opt.test_csv, pnn::GroupMode::Column);
  const pnn::EmpiricalStats emp = pnn::group_replicates(test_set);

  const pnn::GprTuneResult tuned = pnn::gpr_tune_noise(
      train_set, emp, parse_double_list(opt.length_scale_bounds, "length_scale_bounds"),
      parse_double_list(opt.noise_grid, "noise_grid"), opt.jobs);

  std::vector<pnn::GaussianPrediction> preds;
  preds.reserve(emp.groups.size());
  for (const auto& g : emp.groups) {
    pnn::GaussianPrediction p = pnn::gpr_predict(tuned.best_model, g.input);
    if (!(p.variance > 0.0)) p.variance = pnn::kGprJitter;
    preds.push_back(p);
  }
  const pnn::EvalReport report = pnn::evaluate(preds, emp);

  const fs::path dir = prepare_out_dir(opt.out, "gpr");
  pnn::write_gpr_grid_csv(tuned, dir / "gpr_grid.csv");
  json ck;
  ck["format"] = "gpr-checkpoint";
  ck["version"] = 1;
  ck["length_scale"] = tuned.best_model.config.length_scale;
  ck["noise_variance"] = tuned.best_model.config.noise_variance;
  ck["train_csv"] = opt.train_csv;
  {
    std::ofstream out(dir / "gpr_checkpoint.json", std::ios::binary);
    if (!out) throw pnn::IoError("gpr: cannot write checkpoint");
    out << ck.dump(2) << "\n";
  }
  pnn::write_report_json(report, dir / "report.json");
  pnn::write_scatter_csvs(report, dir / "scatter_mean.csv", dir / "scatter_interval.csv");
  write_manifest(dir, "gpr",
                 {{"train_csv", opt.train_csv},
                  {"test_csv", opt.test_csv},
                  {"length_scale_bounds", opt.length_scale_bounds},
                  {"noise_grid", opt.noise_grid}},
                 {"gpr_grid.csv", "gpr_checkpoint.json", "report.json", "scatter_mean.csv",
                  "scatter_interval.csv"});
  const pnn::GprTuneCell& best = tuned.cells[tuned.best_index];
  std::cout << "best gpr cell bound " << pnn::format_double(best.length_scale_upper)
            << " noise " << pnn::format_double(best.noise_variance) << " kl "
            << pnn::format_double(best.kl) << "\n";
  return kExitOk;
}

struct ReportOptions {
  std::vector<std::string> run_dirs;
  std::string out;
};

int cmd_report(const ReportOptions& opt) {
  json summary = json::array();
  for (const auto& run : opt.run_dirs) {
    std::vector<fs::path> manifests;
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(run, ec);
         !ec && it != fs::recursive_directory_iterator(); ++it) {
      if (it->path().filename() == "manifest.json") manifests.push_back(it->path());
    }
    if (ec) throw pnn::IoError("report: cannot scan " + run);
    std::sort(manifests.begin(), manifests.end());
    for (const auto& path : manifests) {
      std::ifstream in(path);
      json m;
      try {
        in >> m;
      } catch (const json::exception&) {
        throw pnn::IoError("report: invalid manifest " + path.string());
      }
      m["path"] = path.string();
      const fs::path report_path = path.parent_path() / "report.json";
      if (fs::exists(report_path)) {
        std::ifstream rin(report_path);
        json r;
        rin >> r;
        m["report"] = r;
      }
      summary.push_back(std::move(m));
    }
  }
  const fs::path dir = prepare_out_dir(opt.out, "report");
  std::ofstream out(dir / "summary.json", std::ios::binary);
  if (!out) throw pnn::IoError("report: cannot write summary.json");
  out << summary.dump(2) << "\n";
  std::cout << "aggregated " << summary.size() << " manifests into "
            << (dir / "summary.json").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic neural networks for heteroscedastic regression"};
  // INI-style config file with one section per subcommand; flags given on the
  // command line override file values, and unknown keys are rejected by name
  app.set_config("--config", "", "INI config file (one [section] per subcommand)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* sub_gen = app.add_subcommand("generate", "Generate a synthetic benchmark dataset");
  sub_gen->add_option("--benchmark", gen.benchmark, "Benchmark name: cubic or ishigami")
      ->required()
      ->check(CLI::IsMember({"cubic", "ishigami"}));
  sub_gen->add_option("--seed", gen.seed, "Master seed");
  sub_gen->add_option("--train-unique", gen.train_unique,
                      "Unique training inputs (0 = benchmark default)");
  sub_gen->add_option("--test-unique", gen.test_unique,
                      "Unique test inputs (0 = benchmark default)");
  sub_gen->add_option("--replicates", gen.replicates, "Replicates per unique input");
  sub_gen->add_option("--ishigami-a", gen.ishigami_a, "Ishigami constant a");
  sub_gen->add_option("--ishigami-b", gen.ishigami_b, "Ishigami constant b");
  sub_gen->add_option("--out", gen.out, "Output directory");

  TrainOptions tr;
  auto* sub_tr = app.add_subcommand("train", "Train one probabilistic network");
  sub_tr->add_option("--train", tr.train_csv, "Training CSV")->required();
  sub_tr->add_option("--depth", tr.depth, "Hidden layers");
  sub_tr->add_option("--width", tr.width, "Units per hidden layer");
  sub_tr->add_option("--epochs", tr.epochs, "Training epochs");
  sub_tr->add_option("--batch", tr.batch_size, "Mini-batch size");
  sub_tr->add_option("--loss", tr.loss, "Loss: nll or mse")
      ->check(CLI::IsMember({"nll", "mse"}));
  sub_tr->add_option("--lr", tr.learning_rate, "RMSProp learning rate");
  sub_tr->add_option("--decay", tr.decay, "RMSProp decay rate");
  sub_tr->add_option("--epsilon", tr.epsilon, "RMSProp stability constant");
  sub_tr->add_option("--variance-floor", tr.variance_floor, "Variance head floor");
  sub_tr->add_flag("--standardize", tr.standardize, "Z-score inputs before training");
  sub_tr->add_option("--seed", tr.seed, "Master seed");
  sub_tr->add_option("--out", tr.out, "Output directory");

  GridOptions gr;
  auto* sub_gr = app.add_subcommand("gridsearch", "Depth/width grid search scored by KL");
  sub_gr->add_option("--train", gr.train_csv, "Training CSV")->required();
  sub_gr->add_option("--test", gr.test_csv, "Replicated-input test CSV")->required();
  sub_gr->add_option("--depths", gr.depths, "Depth grid")->delimiter(',');
  sub_gr->add_option("--widths", gr.widths, "Width grid")->delimiter(',');
  sub_gr->add_option("--seeds-per-cell", gr.seeds_per_cell, "Training runs per cell");
  sub_gr->add_option("--epochs", gr.epochs, "Training epochs");
  sub_gr->add_option("--batch", gr.batch_size, "Mini-batch size");
  sub_gr->add_option("--seed", gr.seed, "Master seed");
  sub_gr->add_option("--jobs", gr.jobs, "Worker threads (0 = all cores)");
  sub_gr->add_option("--out", gr.out, "Output directory");

  EvaluateOptions ev;
  auto* sub_ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a test CSV");
  sub_ev->add_option("--checkpoint", ev.checkpoint, "PNN or GPR checkpoint JSON")->required();
  sub_ev->add_option("--test", ev.test_csv, "Replicated-input test CSV")->required();
  sub_ev->add_option("--out", ev.out, "Output directory");

  GprOptions gp;
  auto* sub_gp = app.add_subcommand("gpr", "Tune and evaluate the GPR baseline");
  sub_gp->add_option("--train", gp.train_csv, "Training CSV")->required();
  sub_gp->add_option("--test", gp.test_csv, "Replicated-input test CSV")->required();
  sub_gp->add_option("--length-scale-bounds", gp.length_scale_bounds,
                     "Length-scale upper bounds grid")
      ->delimiter(',');
  sub_gp->add_option("--noise-grid", gp.noise_grid, "Noise variance grid")->delimiter(',');
  sub_gp->add_option("--jobs", gp.jobs, "Worker threads (0 = all cores)");
  sub_gp->add_option("--out", gp.out, "Output directory");

  ReportOptions rp;
  auto* sub_rp = app.add_subcommand("report", "Aggregate run manifests into one summary");
  sub_rp->add_option("--runs", rp.run_dirs, "Run directories to scan")->required();
  sub_rp->add_option("--out", rp.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sub_gen->parsed()) return cmd_generate(gen);
    if (sub_tr->parsed()) return cmd_train(tr);
    if (sub_gr->parsed()) return cmd_gridsearch(gr);
    if (sub_ev->parsed()) return cmd_evaluate(ev);
    if (sub_gp->parsed()) return cmd_gpr(gp);
    if (sub_rp->parsed()) return cmd_report(rp);
  } catch (const pnn::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const pnn::TrainingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const pnn::FactorizationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
