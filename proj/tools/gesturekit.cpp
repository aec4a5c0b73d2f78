#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gesturekit/dataset.hpp"
#include "gesturekit/eval.hpp"
#include "gesturekit/selftest.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitAcceptance = 3;

struct Global {
  std::uint64_t seed = 7;
  int threads = 1;  // accepted for compatibility; the pipeline is single-threaded
  bool verbose = false;
};

gk::nn::TrainSchedule schedule_from_config(const std::string& path,
                                           const Global& g) {
  gk::nn::TrainSchedule s;
  s.seed = g.seed;
  s.verbose = g.verbose;
  if (path.empty()) return s;
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(f);
  s.lr = j.value("lr", s.lr);
  s.batch_size = j.value("batch_size", s.batch_size);
  s.max_epochs = j.value("max_epochs", s.max_epochs);
  s.stop_patience = j.value("stop_patience", s.stop_patience);
  s.lr_patience = j.value("lr_patience", s.lr_patience);
  s.lr_factor = j.value("lr_factor", s.lr_factor);
  s.stop_at_val_accuracy = j.value("stop_at_val_accuracy", s.stop_at_val_accuracy);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

struct SplitViews {
  std::vector<const gk::RsaImage*> train_images, val_images;
  std::vector<int> train_labels, val_labels;
};

SplitViews split_views(const std::vector<gk::SampleRecord>& records) {
  SplitViews v;
  for (const auto& r : records) {
    if (r.split == gk::Split::Train) {
      v.train_images.push_back(&r.image);
      v.train_labels.push_back(static_cast<int>(r.label));
    } else {
      v.val_images.push_back(&r.image);
      v.val_labels.push_back(static_cast<int>(r.label));
    }
  }
  return v;
}

gk::nn::DataView data_view(const std::vector<const gk::RsaImage*>& images,
                           const std::vector<int>& labels) {
  gk::nn::DataView view;
  view.x.reserve(images.size());
  for (const auto* img : images) view.x.push_back(img->data.data());
  view.y = labels;
  return view;
}

int cmd_gen(const Global& g, const std::string& out, int per_class, int crops,
            int frames, double val_ratio) {
  gk::GenerateOptions opt;
  opt.per_class = per_class;
  opt.crops_per_recording = crops;
  opt.block_frames = frames;
  opt.seed = g.seed;
  opt.verbose = g.verbose;
  auto records = gk::generate_dataset(opt);
  gk::split_dataset(records, val_ratio, g.seed + 1);
  gk::save_dataset(out, records);
  if (g.verbose)
    std::fprintf(stderr, "gen: wrote %zu samples to %s\n", records.size(),
                 out.c_str());
  return kExitOk;
}

int cmd_process(const Global& g, const std::string& input,
                const std::string& output, const std::string& label,
                const std::string& pgm_prefix) {
  auto cubes = gk::load_cubes(input);
  if (cubes.size() != gk::kRsaTime)
    throw std::runtime_error(input + ": expected 128 frames, got " +
                             std::to_string(cubes.size()));
  gk::ChirpConfig cfg;
  auto img = gk::process_recording(cubes, cfg);
  if (!label.empty()) img.label = static_cast<int>(gk::gesture_from_name(label));
  gk::save_rsa(output, img);
  if (!pgm_prefix.empty())
    for (int c = 0; c < gk::kRsaChannels; ++c)
      gk::save_pgm(pgm_prefix + "_ch" + std::to_string(c) + ".pgm", img, c);
  if (g.verbose) std::fprintf(stderr, "process: wrote %s\n", output.c_str());
  return kExitOk;
}

int cmd_train(const Global& g, const std::string& arch, const std::string& data,
              const std::string& out, const std::string& config,
              const std::string& history) {
  auto records = gk::load_dataset(data);
  auto views = split_views(records);
  if (views.train_images.empty() || views.val_images.empty())
    throw std::runtime_error(data + ": needs non-empty train and val splits");

  if (arch == "template") {
    auto templates = gk::fit_templates(views.train_images, views.train_labels);
    gk::save_template_checkpoint(out, templates);
    auto report =
        gk::evaluate_templates(templates, views.val_images, views.val_labels, arch);
    std::printf("template: val accuracy %.4f (%d samples)\n",
                report.average_accuracy, report.sample_count);
    return kExitOk;
  }

  auto schedule = schedule_from_config(config, g);
  auto model = gk::build_model(arch, g.seed);
  auto result = gk::nn::train(model, data_view(views.train_images, views.train_labels),
                              data_view(views.val_images, views.val_labels), schedule);
  gk::save_model_checkpoint(out, arch, model);
  if (!history.empty()) gk::nn::write_history_csv(history, result.history);
  std::printf("%s: best val loss %.4f, val accuracy %.4f at epoch %d\n",
              arch.c_str(), result.best_val_loss, result.best_val_acc,
              result.best_epoch);
  return kExitOk;
}

int cmd_eval(const Global& g, const std::string& model_path,
             const std::string& data, const std::string& report_path,
             const std::string& split) {
  auto records = gk::load_dataset(data);
  std::vector<const gk::RsaImage*> images;
  std::vector<int> labels;
  for (const auto& r : records) {
    if (split == "val" && r.split != gk::Split::Val) continue;
    if (split == "train" && r.split != gk::Split::Train) continue;
    images.push_back(&r.image);
    labels.push_back(static_cast<int>(r.label));
  }
  if (images.empty()) throw std::runtime_error(data + ": empty " + split + " split");

  const std::string kind = gk::checkpoint_kind(model_path);
  gk::EvalReport report;
  if (kind == "template") {
    auto templates = gk::load_template_checkpoint(model_path);
    report = gk::evaluate_templates(templates, images, labels, kind);
  } else {
    auto model = gk::load_model_checkpoint(model_path);
    report = gk::evaluate_model(model, images, labels, kind);
  }
  gk::write_report_csv(report_path, report);
  std::printf("%s: accuracy %.4f on %d %s samples\n", kind.c_str(),
              report.average_accuracy, report.sample_count, split.c_str());
  if (g.verbose)
    for (const auto& e : gk::error_breakdown(report))
      std::fprintf(stderr, "  %s -> %s: %d (%.3f)\n", gk::gesture_name(e.truth),
                   gk::gesture_name(e.predicted), e.count, e.rate);
  return kExitOk;
}

int cmd_infer(const Global&, const std::string& model_path,
              const std::string& input) {
  auto img = gk::load_rsa(input);
  const std::string kind = gk::checkpoint_kind(model_path);
  std::array<double, gk::kNumClasses> probs{};
  if (kind == "template") {
    auto templates = gk::load_template_checkpoint(model_path);
    probs = gk::template_scores(img, templates);
  } else {
    auto model = gk::load_model_checkpoint(model_path);
    auto p = gk::nn::predict(model, img.data.data());
    for (int c = 0; c < gk::kNumClasses; ++c) probs[c] = p[c];
  }
  int best = 0;
  for (int c = 0; c < gk::kNumClasses; ++c) {
    std::printf("%s %.6f\n", gk::gesture_name(static_cast<gk::GestureClass>(c)),
                probs[c]);
    if (probs[c] > probs[best]) best = c;
  }
  std::printf("predicted %s\n",
              gk::gesture_name(static_cast<gk::GestureClass>(best)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FMCW radar gesture recognition toolkit"};
  app.require_subcommand(1);

  Global g;
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--threads", g.threads, "worker threads (single-threaded build)");
  app.add_flag("--verbose", g.verbose, "progress and diagnostics on stderr");

  auto* gen = app.add_subcommand("gen", "synthesize a labeled RSA dataset");
  std::string gen_out;
  int per_class = 250, crops = 8, frames = 160;
  double val_ratio = 0.3;
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--per-class", per_class, "recordings per gesture class");
  gen->add_option("--crops", crops, "random crops per recording");
  gen->add_option("--frames", frames, "frames per synthesized block");
  gen->add_option("--val-ratio", val_ratio, "validation split fraction");

  auto* process = app.add_subcommand("process", "raw cube file -> RSA image");
  std::string proc_in, proc_out, proc_label, proc_pgm;
  process->add_option("--input", proc_in, "FMC1 file with 128 concatenated cubes")
      ->required();
  process->add_option("--output", proc_out, "RSA1 output file")->required();
  process->add_option("--label", proc_label, "gesture label to embed");
  process->add_option("--pgm", proc_pgm, "prefix for per-channel PGM dumps");

  auto* train = app.add_subcommand("train", "fit a classifier on a dataset");
  std::string arch, train_data, train_out, train_config, train_history;
  train->add_option("--arch", arch, "vgg10, resnet20 or template")
      ->required()
      ->check(CLI::IsMember({"vgg10", "resnet20", "template"}));
  train->add_option("--data", train_data, "dataset directory")->required();
  train->add_option("--out", train_out, "checkpoint output path")->required();
  train->add_option("--config", train_config, "JSON training schedule overrides");
  train->add_option("--history", train_history, "per-epoch CSV output path");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string eval_model, eval_data, eval_report, eval_split = "val";
  eval->add_option("--model", eval_model, "checkpoint path")->required();
  eval->add_option("--data", eval_data, "dataset directory")->required();
  eval->add_option("--report", eval_report, "report CSV output path")->required();
  eval->add_option("--split", eval_split, "val, train or all")
      ->check(CLI::IsMember({"val", "train", "all"}));

  auto* infer = app.add_subcommand("infer", "classify one RSA file");
  std::string infer_model, infer_input;
  infer->add_option("--model", infer_model, "checkpoint path")->required();
  infer->add_option("--input", infer_input, "RSA1 file")->required();

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(g, gen_out, per_class, crops, frames, val_ratio);
    if (process->parsed())
      return cmd_process(g, proc_in, proc_out, proc_label, proc_pgm);
    if (train->parsed())
      return cmd_train(g, arch, train_data, train_out, train_config, train_history);
    if (eval->parsed())
      return cmd_eval(g, eval_model, eval_data, eval_report, eval_split);
    if (infer->parsed()) return cmd_infer(g, infer_model, infer_input);
    if (selftest->parsed())
      return gk::run_selftest(true) ? kExitOk : kExitAcceptance;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
