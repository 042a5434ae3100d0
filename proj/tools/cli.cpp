// Copyright 2026 The VesselGrow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <system_error>
#include <typeinfo>

#include "CLI11.hpp"
#include "json.hpp"
#include "vesselgrow/element.hpp"
#include "vesselgrow/errors.hpp"
#include "vesselgrow/eval.hpp"
#include "vesselgrow/featureset.hpp"
#include "vesselgrow/forest.hpp"
#include "vesselgrow/imaging.hpp"
#include "vesselgrow/version.hpp"

namespace vesselgrow::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::atomic<bool> g_interrupted{false};

extern "C" void on_interrupt(int) { g_interrupted.store(true); }

class Interrupted : public std::runtime_error {
 public:
  Interrupted() : std::runtime_error("interrupted") {}
};

void check_interrupt() {
  if (g_interrupted.load()) throw Interrupted();
}

// Name of the library error class, for diagnostics.
std::string error_kind(const Error& e) {
#define VG_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T
  VG_KIND(IoError);
  VG_KIND(FormatError);
  VG_KIND(PairingError);
  VG_KIND(DimensionError);
  VG_KIND(ParamError);
  VG_KIND(BoundsError);
  VG_KIND(SchemaError);
  VG_KIND(EmptyDatasetError);
  VG_KIND(DegenerateError);
  VG_KIND(VersionError);
  VG_KIND(CorruptModelError);
  VG_KIND(SingleClassError);
#undef VG_KIND
  return "Error";
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create '" + parent.string() + "': " + ec.message());
}

json forest_json(const ForestParams& p) {
  return {{"n_trees", p.n_trees}, {"mtry", p.mtry}, {"max_depth", p.max_depth},
          {"min_leaf", p.min_leaf}, {"seed", p.seed},
          {"seed_masked_features", p.seed_masked_features}};
}

json element_json(const ElementParams& p) {
  return {{"seed_threshold", p.seed_threshold},
          {"grow_threshold", p.grow_threshold},
          {"radial_radius", p.radial_radius},
          {"connectivity", p.use_connectivity},
          {"seed_model", p.use_seed_model}};
}

json sampling_json(const SampleOptions& s) {
  return {{"subsample", s.subsample}, {"seed", s.seed}, {"balanced", s.balanced},
          {"connectivity", s.connectivity}};
}

// Every run leaves one of these next to its outputs.
void write_manifest(const fs::path& path, const std::string& command,
                    const std::vector<std::string>& args, json parameters, json outputs) {
  json m;
  m["tool"] = "vesselgrow";
  m["version"] = kVersion;
  m["command"] = command;
  m["argv"] = args;
  m["parameters"] = std::move(parameters);
  m["outputs"] = std::move(outputs);
  const char* threads = std::getenv("VESSELGROW_THREADS");
  m["environment"] = {{"VESSELGROW_THREADS", threads ? json(threads) : json(nullptr)}};
  m["created_utc"] = utc_now();
  write_text(path, m.dump(2) + "\n");
}

struct Flags {
  std::uint64_t seed = 1;
  ForestParams forest = element_forest_params();
  ElementParams element;
  SampleOptions sampling;
  bool no_connectivity = false;
  bool no_seed_model = false;

  // Propagates the shared seed and the ablation switch.
  void resolve() {
    forest.seed = seed;
    sampling.seed = seed;
    element.use_connectivity = !no_connectivity;
    element.use_seed_model = !no_seed_model;
    if (no_seed_model) forest.seed_masked_features.clear();
    sampling.connectivity = !no_connectivity;
    sampling.radial_radius = element.radial_radius;
  }
};

void add_seed(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed", f.seed, "Seed for sampling and forest training")
      ->capture_default_str();
}

void add_forest_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--n-trees", f.forest.n_trees, "Trees in the forest")->capture_default_str();
  cmd->add_option("--mtry", f.forest.mtry, "Features drawn per split")->capture_default_str();
  cmd->add_option("--max-depth", f.forest.max_depth, "Depth limit, 0 = unlimited")
      ->capture_default_str();
  cmd->add_option("--min-leaf", f.forest.min_leaf, "Minimum rows per leaf")
      ->capture_default_str();
}

void add_sampling_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--subsample", f.sampling.subsample, "Pixel retention rate in (0, 1]")
      ->capture_default_str();
  cmd->add_flag("--balanced", f.sampling.balanced, "Equal vessel/background row counts");
}

void add_element_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--seed-threshold", f.element.seed_threshold, "Phase-1 seed probability")
      ->capture_default_str();
  cmd->add_option("--grow-threshold", f.element.grow_threshold, "Phase-2 growth probability")
      ->capture_default_str();
  cmd->add_flag("--no-seed-model", f.no_seed_model,
                "Seed with the connectivity-aware forest instead of the seed forest");
}

void add_connectivity_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--radial-radius", f.element.radial_radius, "Radial connectivity radius")
      ->capture_default_str();
  cmd->add_flag("--no-connectivity", f.no_connectivity,
                "Force connectivity features to 0 (ablation)");
}

// ------------------------------------------------------------------ extract

int cmd_extract(const fs::path& dataset, const fs::path& out_dir, Flags flags,
                const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  flags.resolve();
  flags.sampling.validate();
  const std::vector<DatasetEntry> entries = load_dataset(dataset);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());
  if (entries.empty()) err << "warning: no image pairs found in '" << dataset.string() << "'\n";

  json files = json::array();
  for (const DatasetEntry& e : entries) {
    check_interrupt();
    const LabeledDataset ds = build_training_rows(e, flags.sampling);
    const fs::path csv = out_dir / (e.image_id + ".csv");
    write_csv(ds, csv);
    out << e.image_id << ": " << ds.size() << " rows -> " << csv.string() << "\n";
    files.push_back({{"image_id", e.image_id}, {"csv", csv.string()}, {"rows", ds.size()}});
  }
  write_manifest(out_dir / "run.json", "extract", args,
                 {{"dataset", dataset.string()}, {"sampling", sampling_json(flags.sampling)}},
                 {{"csv", files}});
  return kExitOk;
}

// -------------------------------------------------------------------- train

int cmd_train(const std::vector<std::string>& csvs, const std::string& dataset,
              const std::string& held_out, const fs::path& model_out, Flags flags,
              const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  flags.resolve();
  LabeledDataset ds;
  json inputs;
  if (!csvs.empty()) {
    for (const std::string& path : csvs) ds.append(read_csv(path));
    inputs["csv"] = csvs;
  } else {
    flags.sampling.validate();
    const std::vector<DatasetEntry> entries = load_dataset(dataset);
    bool found = held_out.empty();
    for (const DatasetEntry& e : entries) {
      if (e.image_id == held_out) {
        found = true;
        continue;
      }
      check_interrupt();
      ds.append(build_training_rows(e, flags.sampling));
    }
    if (!found) throw PairingError("held-out id '" + held_out + "' is not in the dataset");
    inputs = {{"dataset", dataset}, {"held_out", held_out},
              {"sampling", sampling_json(flags.sampling)}};
  }
  if (ds.empty()) throw EmptyDatasetError("no training rows");

  TrainReport report;
  const ForestModel model = train(ds, flags.forest, &report);
  for (const std::string& w : report.warnings) err << "warning: " << w << "\n";
  if (report.degenerate) {
    throw DegenerateError("training rows have identical features with mixed labels");
  }
  ensure_parent(model_out);
  save_model(model, model_out);

  out << "trained " << model.trees().size() << " trees on " << report.rows << " rows ("
      << report.positives << " vessel)\n";
  if (report.oob_error) {
    out << "out-of-bag error: " << std::fixed << std::setprecision(4) << *report.oob_error
        << " over " << report.oob_rows << " rows\n";
    if (report.seed_oob_error) {
      out << "seed forest out-of-bag error: " << *report.seed_oob_error << "\n";
    }
  } else {
    out << "out-of-bag error: n/a\n";
  }
  fs::path manifest = model_out;
  manifest += ".run.json";
  write_manifest(manifest, "train", args,
                 {{"inputs", inputs}, {"forest", forest_json(flags.forest)}},
                 {{"model", model_out.string()},
                  {"n_features", model.n_features()},
                  {"oob_error", report.oob_error ? json(*report.oob_error) : json(nullptr)}});
  return kExitOk;
}

// ------------------------------------------------------------------ segment

int cmd_segment(const fs::path& image_path, const fs::path& model_path,
                const fs::path& mask_out, const std::string& proba_out, Flags flags,
                const std::vector<std::string>& args, std::ostream& out) {
  flags.resolve();
  const GrayImage image = load_gray(image_path);
  const ForestModel model = load_model(model_path);
  const SegmentResult result = segment(image, model, flags.element);
  ensure_parent(mask_out);
  save_mask(result.mask, mask_out);
  json outputs = {{"mask", mask_out.string()}};
  if (!proba_out.empty()) {
    ensure_parent(proba_out);
    save_unit16(result.proba, proba_out);
    outputs["proba"] = proba_out;
  }
  const SegmentStats& s = result.stats;
  out << "segmented " << image.width() << "x" << image.height() << ": "
      << count_set(result.mask) << " vessel pixels (" << s.seeds << " seeds, " << s.grown
      << " grown, " << s.fallback_vessel << " fallback), " << s.classifier_calls
      << " classifier calls\n";
  outputs["stats"] = {{"classifier_calls", s.classifier_calls}, {"seeds", s.seeds},
                      {"grown", s.grown}, {"rejected", s.rejected},
                      {"fallback_vessel", s.fallback_vessel}};
  fs::path manifest = mask_out;
  manifest += ".run.json";
  write_manifest(manifest, "segment", args,
                 {{"image", image_path.string()}, {"model", model_path.string()},
                  {"element", element_json(flags.element)}},
                 outputs);
  return kExitOk;
}

// --------------------------------------------------------------------- loio

int cmd_loio(const fs::path& dataset, const fs::path& out_dir, Flags flags, bool save_models,
             const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  flags.resolve();
  const std::vector<DatasetEntry> entries = load_dataset(dataset);

  // Everything is staged next to the destination and renamed on success.
  fs::path stage = out_dir;
  stage += ".partial";
  std::error_code ec;
  fs::remove_all(stage, ec);
  for (const char* sub : {"masks", "proba", "models"}) {
    fs::create_directories(stage / sub, ec);
    if (ec) throw IoError("cannot create '" + (stage / sub).string() + "': " + ec.message());
  }

  try {
    LoioOptions opts;
    opts.forest = flags.forest;
    opts.element = flags.element;
    opts.sampling = flags.sampling;
    opts.log = [&](std::string_view msg) {
      check_interrupt();
      err << "[loio] " << msg << "\n";
    };
    opts.on_fold = [&](const FoldOutcome& fold, const ForestModel& model) {
      check_interrupt();
      save_mask(fold.mask, stage / "masks" / (fold.image_id + ".png"));
      save_unit16(fold.proba, stage / "proba" / (fold.image_id + ".png"));
      if (save_models) save_model(model, stage / "models" / (fold.image_id + ".vgf"));
      const SegmentStats& s = fold.segment_stats;
      err << "[loio] fold '" << fold.image_id << "': " << s.classifier_calls
          << " classifier calls, unresolved " << s.unresolved << "\n";
    };
    LoioResult result = leave_one_image_out(entries, opts);

    MetricsReport& report = result.report;
    report.notes["aggregation"] = "pooled over all pixels of all folds";
    report.notes["subsample"] = std::to_string(flags.sampling.subsample);
    report.notes["connectivity"] = flags.element.use_connectivity ? "on" : "off";
    write_text(stage / "metrics.json", report.to_json());
    write_text(stage / "metrics.txt", report.to_table() + report.summary_line() + "\n");

    std::ostringstream roc;
    roc << "fpr,tpr\n" << std::setprecision(17);
    for (const RocPoint& p : result.pooled_roc) roc << p.fpr << "," << p.tpr << "\n";
    write_text(stage / "roc.csv", roc.str());

    json folds = json::array();
    for (const FoldOutcome& f : result.folds) {
      folds.push_back({{"image_id", f.image_id},
                       {"train_rows", f.train_report.rows},
                       {"oob_error", f.train_report.oob_error ? json(*f.train_report.oob_error)
                                                             : json(nullptr)},
                       {"classifier_calls", f.segment_stats.classifier_calls},
                       {"unresolved", f.segment_stats.unresolved}});
    }
    write_manifest(stage / "run.json", "loio", args,
                   {{"dataset", dataset.string()},
                    {"forest", forest_json(flags.forest)},
                    {"element", element_json(flags.element)},
                    {"sampling", sampling_json(flags.sampling)},
                    {"save_models", save_models}},
                   {{"folds", folds}, {"summary", report.summary_line()}});

    fs::remove_all(out_dir, ec);
    fs::rename(stage, out_dir, ec);
    if (ec) throw IoError("cannot move results into '" + out_dir.string() + "': " + ec.message());

    out << report.to_table();
    out << "This work (leave one image out): " << report.summary_line() << "\n";
  } catch (...) {
    fs::remove_all(stage, ec);
    throw;
  }
  return kExitOk;
}

// --------------------------------------------------------------- dump-plane

int cmd_dump_plane(const fs::path& image_path, const std::string& plane,
                   const fs::path& out_png, const std::vector<std::string>& args,
                   std::ostream& out, std::ostream& err) {
  const int index = grey_plane_index(plane);
  if (index < 0) {
    err << "error: unknown plane '" << plane << "'. Valid names:";
    for (std::size_t k = 0; k < kGreyFeatureCount; ++k) err << " " << feature_names()[k];
    err << "\n";
    return kExitUsage;
  }
  const GrayImage image = load_gray(image_path);
  const FeatureStack stack = extract_stack(image, image_path.stem().string());
  ensure_parent(out_png);
  save_gray8(normalize_min_max(stack.planes[static_cast<std::size_t>(index)]), out_png);
  out << "wrote " << plane << " (" << image.width() << "x" << image.height() << ") to "
      << out_png.string() << "\n";
  fs::path manifest = out_png;
  manifest += ".run.json";
  write_manifest(manifest, "dump-plane", args,
                 {{"image", image_path.string()}, {"plane", plane}},
                 {{"png", out_png.string()}});
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vessel segmentation for X-ray angiograms by region-growing pixel "
               "classification",
               "vesselgrow"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Flags flags;
  std::string dataset, out_dir, model_path, model_out, image_path, mask_out, proba_out,
      held_out, plane, png_out;
  std::vector<std::string> csvs;
  bool no_models = false;

  CLI::App* extract = app.add_subcommand("extract", "Write per-image feature CSVs");
  extract->add_option("--dataset", dataset, "Dataset directory")->required();
  extract->add_option("--out", out_dir, "Output directory for CSVs")->required();
  flags.sampling.subsample = 1.0;
  add_sampling_flags(extract, flags);
  add_seed(extract, flags);
  add_connectivity_flags(extract, flags);

  CLI::App* train_cmd = app.add_subcommand("train", "Train a forest model");
  auto* csv_opt = train_cmd->add_option("--csv", csvs, "Feature CSV files");
  auto* ds_opt = train_cmd->add_option("--dataset", dataset, "Dataset directory");
  csv_opt->excludes(ds_opt);
  train_cmd->add_option("--held-out", held_out, "Image id to leave out")->needs(ds_opt);
  train_cmd->add_option("--model-out", model_out, "Model file to write")->required();
  add_forest_flags(train_cmd, flags);
  train_cmd->add_flag("--no-seed-model", flags.no_seed_model, "Do not grow a seed forest");
  add_seed(train_cmd, flags);
  add_connectivity_flags(train_cmd, flags);
  CLI::Option* train_subsample =
      train_cmd->add_option("--subsample", flags.sampling.subsample,
                            "Pixel retention rate (dataset input, default 0.1)");
  train_cmd->add_flag("--balanced", flags.sampling.balanced,
                      "Equal vessel/background row counts");

  CLI::App* segment_cmd = app.add_subcommand("segment", "Segment one image");
  segment_cmd->add_option("--image", image_path, "Input angiogram")->required();
  segment_cmd->add_option("--model", model_path, "Model file")->required();
  segment_cmd->add_option("--mask-out", mask_out, "Output mask PNG")->required();
  segment_cmd->add_option("--proba-out", proba_out, "Optional 16-bit probability PNG");
  add_element_flags(segment_cmd, flags);
  add_connectivity_flags(segment_cmd, flags);

  CLI::App* loio = app.add_subcommand("loio", "Leave-one-image-out evaluation");
  loio->add_option("--dataset", dataset, "Dataset directory")->required();
  loio->add_option("--out", out_dir, "Output directory")->required();
  loio->add_flag("--no-models", no_models, "Do not write per-fold model files");
  add_forest_flags(loio, flags);
  add_element_flags(loio, flags);
  add_connectivity_flags(loio, flags);
  CLI::Option* loio_subsample = loio->add_option(
      "--subsample", flags.sampling.subsample, "Pixel retention rate (default 0.1)");
  loio->add_flag("--balanced", flags.sampling.balanced, "Equal vessel/background row counts");
  add_seed(loio, flags);

  CLI::App* dump = app.add_subcommand("dump-plane", "Write one feature plane as PNG");
  dump->add_option("--image", image_path, "Input image")->required();
  dump->add_option("--plane", plane, "Plane name, e.g. hess_tr")->required();
  dump->add_option("--out", png_out, "Output PNG")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  g_interrupted = false;
  try {
    if (*extract) return cmd_extract(dataset, out_dir, flags, args, out, err);
    if (*train_cmd) {
      if (csvs.empty() && dataset.empty()) {
        err << "usage error: train needs --csv or --dataset\n";
        return kExitUsage;
      }
      if (train_subsample->count() == 0) flags.sampling.subsample = 0.1;
      return cmd_train(csvs, dataset, held_out, model_out, flags, args, out, err);
    }
    if (*segment_cmd) {
      return cmd_segment(image_path, model_path, mask_out, proba_out, flags, args, out);
    }
    if (*loio) {
      if (loio_subsample->count() == 0) flags.sampling.subsample = 0.1;
      return cmd_loio(dataset, out_dir, flags, !no_models, args, out, err);
    }
    if (*dump) return cmd_dump_plane(image_path, plane, png_out, args, out, err);
  } catch (const Error& e) {
    err << "error: " << error_kind(e) << ": " << e.what() << "\n";
    return kExitData;
  } catch (const Interrupted&) {
    err << "error: interrupted; partial outputs removed\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace vesselgrow::cli
