#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "shaperank/core/error.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"shaperank: from 3D meshes and pairwise preferences to "
               "feature attributions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "shaperank 0.1.0");

  std::string config_path, out_dir, category;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "pipeline configuration file")
      ->check(CLI::ExistingFile);
  auto* opt_seed = app.add_option("--seed", seed, "override the config seed");
  auto* opt_out =
      app.add_option("--out", out_dir, "stage directory (overrides paths.out)");
  auto* opt_category =
      app.add_option("--category", category, "override the config category");

  std::string mesh_dir, comparisons, report_dir;
  std::vector<std::string> crosscat_dirs;

  auto* cmd_extract = app.add_subcommand(
      "extract", "compute the descriptor table for a directory of meshes");
  cmd_extract->add_option("mesh_dir", mesh_dir,
                          "directory of .obj/.off meshes (default: paths.mesh_dir)");
  auto* cmd_fit_bt = app.add_subcommand(
      "fit-bt", "fit Bradley-Terry scores from pairwise comparisons");
  cmd_fit_bt->add_option(
      "comparisons", comparisons,
      "comparisons CSV with winner,loser[,category] columns (default: "
      "paths.comparisons)");
  auto* cmd_train = app.add_subcommand(
      "train", "grid-searched random forest from features.csv and scores.csv");
  auto* cmd_explain = app.add_subcommand(
      "explain", "SHAP importances and PDP curves for a trained model");
  auto* cmd_crosscat = app.add_subcommand(
      "crosscat", "cross-category importance correlation, clustering, and MANOVA");
  cmd_crosscat
      ->add_option("dirs", crosscat_dirs, "two or more per-category stage directories")
      ->required()
      ->expected(2, -1);
  auto* cmd_synth = app.add_subcommand(
      "synth", "run a planted-ground-truth experiment end to end");
  auto* cmd_report = app.add_subcommand(
      "report", "consolidated JSON and SVG summaries for a stage directory");
  cmd_report->add_option("dir", report_dir, "stage directory (default: paths.out)");

  for (CLI::App* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  using namespace shaperank;
  try {
    io::Config config =
        config_path.empty() ? cli::default_config() : cli::load_config(config_path);
    if (opt_seed->count() > 0) config.set("seed", std::to_string(seed));
    if (opt_out->count() > 0) config.set("paths.out", out_dir);
    if (opt_category->count() > 0) config.set("category", category);
    const fs::path out = config.get("paths.out", "out");

    if (cmd_extract->parsed()) {
      cli::run_extract(
          config, mesh_dir.empty() ? config.get("paths.mesh_dir", "meshes") : mesh_dir,
          out);
    } else if (cmd_fit_bt->parsed()) {
      cli::run_fit_bt(config,
                      comparisons.empty()
                          ? config.get("paths.comparisons", "comparisons.csv")
                          : comparisons,
                      out);
    } else if (cmd_train->parsed()) {
      cli::run_train(config, out);
    } else if (cmd_explain->parsed()) {
      cli::run_explain(config, out);
    } else if (cmd_crosscat->parsed()) {
      std::vector<fs::path> dirs(crosscat_dirs.begin(), crosscat_dirs.end());
      cli::run_crosscat(config, dirs, out);
    } else if (cmd_synth->parsed()) {
      cli::run_synth(config, out);
    } else if (cmd_report->parsed()) {
      cli::run_report(config, report_dir.empty() ? out : fs::path(report_dir));
    }
    return 0;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: did not converge: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
