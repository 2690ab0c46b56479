// Command-line front end: augment, export-context, stats, preview, validate.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ctxaug/dataset_io.hpp"
#include "ctxaug/error.hpp"
#include "ctxaug/pipeline.hpp"
#include "ctxaug/scorer.hpp"

namespace fs = std::filesystem;
using namespace ctxaug;

namespace {

struct InputOptions {
  std::string input;
  std::string image_root;
  std::string format = "coco";
};

struct ConfigOptions {
  std::string mode = "context";
  double prob = 0.5;
  std::string schedule = "constant";
  std::uint64_t seed = 0;
  std::string scorer;
  std::string format_out;
  int max_paste = 2;
  double threshold = 0.7;
  int candidates = 200;
  int variants = 3;
  double bg_ratio = 3.0;
  int workers = 1;
  std::size_t min_pixels = InstanceDatabase::kDefaultMinPixels;
  bool weak_masks = false;
  std::string dump_candidates;
  double timeout = 30.0;

  AugmentConfig build(const InputOptions& in) const {
    AugmentConfig c;
    c.mode = parse_mode(mode);
    c.paste_probability = prob;
    c.schedule = parse_schedule(schedule);
    c.seed = seed;
    c.scorer = scorer;
    c.format_in = parse_format(in.format);
    c.format_out = format_out.empty() ? c.format_in : parse_format(format_out);
    c.max_placements = max_paste;
    c.threshold = threshold;
    c.candidates = candidates;
    c.variants = variants;
    c.bg_ratio = bg_ratio;
    c.workers = workers;
    c.min_pixels = min_pixels;
    c.weak_masks = weak_masks;
    if (!dump_candidates.empty()) c.dump_candidates = dump_candidates;
    c.validate();
    return c;
  }
};

void add_input(CLI::App* cmd, InputOptions& in) {
  cmd->add_option("--input,-i", in.input, "COCO annotation JSON, or a dataset directory")->required();
  cmd->add_option("--image-root", in.image_root, "image directory for a COCO JSON (default: <json dir>/images)");
  cmd->add_option("--format-in", in.format, "coco | voc")->check(CLI::IsMember({"coco", "voc"}));
}

void add_config(CLI::App* cmd, ConfigOptions& c, bool augment_only) {
  if (augment_only) {
    cmd->add_option("--mode", c.mode, "context | random | enlarge")->check(CLI::IsMember({"context", "random", "enlarge"}));
    cmd->add_option("--prob", c.prob, "paste probability p0");
    cmd->add_option("--schedule", c.schedule, "constant | linear_decay")
        ->check(CLI::IsMember({"constant", "linear_decay"}));
    cmd->add_option("--scorer", c.scorer, "uniform | oracle | process:<cmd> | tcp:<host:port>");
    cmd->add_option("--max-paste", c.max_paste, "placements per image");
    cmd->add_option("--threshold", c.threshold, "class score a candidate must exceed");
    cmd->add_option("--candidates", c.candidates, "sampled candidate boxes per image");
    cmd->add_option("--variants", c.variants, "contextual images averaged per candidate");
    cmd->add_option("--min-pixels", c.min_pixels, "smallest cutout kept in the instance database");
    cmd->add_flag("--weak-masks", c.weak_masks, "approximate instance masks from semantic maps");
    cmd->add_option("--timeout", c.timeout, "scorer response timeout in seconds");
  }
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--bg-ratio", c.bg_ratio, "background contextual images per positive");
  cmd->add_option("--workers", c.workers, "worker threads");
}

Dataset load_input(const InputOptions& in) {
  const fs::path p = in.input;
  const DatasetFormat f = parse_format(in.format);
  if (f == DatasetFormat::voc) return load_written(p, DatasetFormat::voc);
  if (fs::is_directory(p)) return load_written(p, DatasetFormat::coco);
  fs::path root = in.image_root;
  if (root.empty()) root = fs::exists(p.parent_path() / "images") ? p.parent_path() / "images" : p.parent_path();
  return load_coco(p, root);
}

std::unique_ptr<Scorer> open_scorer(const ConfigOptions& c, const AugmentConfig& cfg, const Dataset& ds) {
  if (cfg.mode != AugmentMode::context) return nullptr;
  if (c.scorer.empty()) throw ConfigError("context mode needs --scorer");
  StreamScorerOptions so;
  so.timeout = std::chrono::milliseconds(static_cast<long long>(c.timeout * 1000.0));
  return make_scorer(c.scorer, ds, so);
}

void print_json(const nlohmann::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write " + out);
  f << j.dump(2) << '\n';
}

int exit_code(ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-driven copy-paste augmentation for detection and segmentation datasets"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  InputOptions in;
  ConfigOptions cfg;
  std::string out;
  bool overwrite = false;

  auto* augment = app.add_subcommand("augment", "write the input plus augmented copies");
  add_input(augment, in);
  add_config(augment, cfg, true);
  augment->add_option("--out,-o", out, "output dataset directory")->required();
  augment->add_option("--format-out", cfg.format_out, "coco | voc (default: same as input)")
      ->check(CLI::IsMember({"coco", "voc"}));
  augment->add_option("--dump-candidates", cfg.dump_candidates, "directory for per-image candidate JSON");
  augment->add_flag("--overwrite", overwrite, "replace an existing output directory");

  std::string regime = "small_data";
  auto* export_cmd = app.add_subcommand("export-context", "write contextual training images and labels.csv");
  add_input(export_cmd, in);
  add_config(export_cmd, cfg, false);
  export_cmd->add_option("--regime", regime, "small_data | normal_data")
      ->check(CLI::IsMember({"small_data", "normal_data"}));
  export_cmd->add_option("--out,-o", out, "output directory")->required();
  export_cmd->add_flag("--overwrite", overwrite, "replace an existing output directory");

  auto* stats = app.add_subcommand("stats", "per-class counts and the shape histogram as JSON");
  add_input(stats, in);
  stats->add_option("--out,-o", out, "JSON file (default: stdout)");

  std::string image_id;
  auto* preview_cmd = app.add_subcommand("preview", "augment one image and write before/after and overlay PNGs");
  add_input(preview_cmd, in);
  add_config(preview_cmd, cfg, true);
  preview_cmd->add_option("--image-id", image_id, "image to preview")->required();
  preview_cmd->add_option("--out,-o", out, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "check record invariants");
  add_input(validate, in);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code(ExitCode::config);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);
  spdlog::set_pattern("[%l] %v");

  try {
    if (*augment) {
      const AugmentConfig c = cfg.build(in);
      const Dataset ds = load_input(in);
      auto scorer = open_scorer(cfg, c, ds);
      const auto summary = augment_dataset(ds, c, scorer.get(), out, {}, overwrite);
      std::cout << summary.augmented << " of " << summary.images << " images augmented, " << summary.pastes
                << " pastes\n";
    } else if (*export_cmd) {
      const AugmentConfig c = cfg.build(in);
      const Dataset ds = load_input(in);
      const auto summary = export_context_set(ds, c, parse_regime(regime), out, overwrite);
      for (const auto& s : summary.splits)
        std::cout << s.name << ": " << s.positives << " positives, " << s.backgrounds << " backgrounds\n";
    } else if (*stats) {
      print_json(dataset_stats(load_input(in)), out);
    } else if (*preview_cmd) {
      const AugmentConfig c = cfg.build(in);
      const Dataset ds = load_input(in);
      auto scorer = open_scorer(cfg, c, ds);
      const auto files = preview(ds, image_id, c, scorer.get(), out);
      std::cout << files.side_by_side.string() << '\n' << files.overlay.string() << '\n';
    } else if (*validate) {
      const auto problems = validate_dataset(load_input(in));
      for (const auto& p : problems) std::cout << p << '\n';
      if (!problems.empty()) return exit_code(ExitCode::integrity);
      std::cout << "ok\n";
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return exit_code(ExitCode::config);
  } catch (const ScorerUnavailable& e) {
    spdlog::error("scorer: {}", e.what());
    return exit_code(ExitCode::scorer);
  } catch (const ProtocolError& e) {
    spdlog::error("scorer protocol: {}", e.what());
    return exit_code(ExitCode::scorer);
  } catch (const IntegrityError& e) {
    spdlog::error("{}", e.what());
    return exit_code(ExitCode::integrity);
  } catch (const ParseError& e) {
    spdlog::error("{}", e.what());
    return exit_code(ExitCode::integrity);
  } catch (const UnsupportedMask& e) {
    spdlog::error("{}", e.what());
    return exit_code(ExitCode::integrity);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code(ExitCode::failure);
  }
  return exit_code(ExitCode::ok);
}
