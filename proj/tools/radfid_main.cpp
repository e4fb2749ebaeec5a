#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "radfid/numeric.hpp"
#include "radfid/phantom.hpp"
#include "radfid/pipeline.hpp"

namespace {

nlohmann::json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw radfid::ValidationError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw radfid::ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::pair<std::string, std::string> split_network_arg(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size())
    throw radfid::ValidationError("--network expects name=manifest.csv, got: " + arg);
  return {arg.substr(0, eq), arg.substr(eq + 1)};
}

// Everything a pipeline subcommand can set; flags given on the command line
// override the matching --config fields.
struct PipelineFlags {
  std::string config_path;
  std::string reference;
  std::vector<std::string> networks;
  std::string out_dir;
  int n_bins = 0;
  double tau = 0, ssim_cutoff = 0, variance_target = 0;
  int n_trees = 0, min_leaf = 0, features_per_split = 0;
  std::vector<int> depth_grid;
  int n_repeats = 0;
  double val_fraction = 0, test_fraction = 0;
  std::uint64_t seed = 0;
  int workers = 0;
};

void add_pipeline_options(CLI::App* sub, PipelineFlags& f) {
  sub->add_option("--config", f.config_path, "Run configuration JSON");
  sub->add_option("--reference", f.reference, "Reference cohort manifest CSV");
  sub->add_option("--network", f.networks,
                  "Network cohort as name=manifest.csv (repeatable)");
  sub->add_option("--out", f.out_dir, "Output directory");
  sub->add_option("--bins", f.n_bins, "Discretization bin count");
  sub->add_option("--tau", f.tau, "Detection threshold on |rho|");
  sub->add_option("--ssim-cutoff", f.ssim_cutoff, "High-performance mean SSIM cutoff");
  sub->add_option("--variance-target", f.variance_target, "PCA explained-variance target");
  sub->add_option("--trees", f.n_trees, "Forest size");
  sub->add_option("--min-leaf", f.min_leaf, "Minimum samples per leaf");
  sub->add_option("--features-per-split", f.features_per_split,
                  "Random features per split, 0 for ceil(sqrt(p))");
  sub->add_option("--depth-grid", f.depth_grid, "Candidate tree depths")
      ->delimiter(',');
  sub->add_option("--repeats", f.n_repeats, "Stratified evaluation repeats");
  sub->add_option("--val-fraction", f.val_fraction, "Validation split fraction");
  sub->add_option("--test-fraction", f.test_fraction, "Test split fraction");
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--workers", f.workers, "Worker threads");
}

radfid::RunConfig build_config(const CLI::App* sub, const PipelineFlags& f) {
  radfid::RunConfig c;
  if (sub->count("--config")) c = radfid::run_config_from_json(load_json(f.config_path));
  c.subcommand = sub->get_name();
  if (sub->count("--reference")) c.reference_manifest = f.reference;
  if (sub->count("--network")) {
    c.networks.clear();
    for (const auto& arg : f.networks) c.networks.push_back(split_network_arg(arg));
  }
  if (sub->count("--out")) c.out_dir = f.out_dir;
  if (sub->count("--bins")) c.n_bins = f.n_bins;
  if (sub->count("--tau")) c.tau = f.tau;
  if (sub->count("--ssim-cutoff")) c.ssim_cutoff = f.ssim_cutoff;
  if (sub->count("--variance-target")) c.variance_target = f.variance_target;
  if (sub->count("--trees")) c.n_trees = f.n_trees;
  if (sub->count("--min-leaf")) c.min_leaf = f.min_leaf;
  if (sub->count("--features-per-split")) c.features_per_split = f.features_per_split;
  if (sub->count("--depth-grid")) c.depth_grid = f.depth_grid;
  if (sub->count("--repeats")) c.n_repeats = f.n_repeats;
  if (sub->count("--val-fraction")) c.val_fraction = f.val_fraction;
  if (sub->count("--test-fraction")) c.test_fraction = f.test_fraction;
  if (sub->count("--seed")) c.seed = f.seed;
  if (sub->count("--workers")) c.workers = f.workers;
  return c;
}

int dispatch(const CLI::App& app, const PipelineFlags& flags,
             const std::string& plan_path, const std::string& phantom_out,
             const CLI::Option* cases_opt, int phantom_cases, int phantom_workers) {
  const CLI::App* sub = app.get_subcommands().front();

  if (sub->get_name() == "phantom") {
    radfid::CohortPlan plan = radfid::cohort_plan_from_json(load_json(plan_path));
    if (cases_opt->count()) plan.n_cases = phantom_cases;
    const radfid::CohortPaths paths =
        radfid::write_phantom_cohort(plan, phantom_out, phantom_workers);
    std::cout << "reference: " << paths.reference_manifest.generic_string() << "\n";
    for (const auto& [name, manifest] : paths.network_manifests)
      std::cout << name << ": " << manifest.generic_string() << "\n";
    return 0;
  }

  const radfid::RunConfig config = build_config(sub, flags);
  const radfid::RunArtifacts art = radfid::run_pipeline(config);
  std::cout << "stages:";
  for (const auto& stage : art.stages_run) std::cout << " " << stage;
  std::cout << "\nsummary: "
            << (config.out_dir / art.summary_json).generic_string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fidelity analysis of synthesized 3D volumes against a reference cohort"};
  app.require_subcommand(1);

  std::string plan_path, phantom_out;
  int phantom_cases = 0, phantom_workers = 1;
  CLI::App* phantom =
      app.add_subcommand("phantom", "Generate a seeded phantom cohort with degraded variants");
  phantom->add_option("--plan", plan_path, "Cohort plan JSON")->required();
  phantom->add_option("--out", phantom_out, "Output directory")->required();
  CLI::Option* cases_opt =
      phantom->add_option("--cases", phantom_cases, "Override the plan's case count");
  phantom->add_option("--workers", phantom_workers, "Worker threads");

  PipelineFlags flags;
  const std::pair<const char*, const char*> pipeline_subs[] = {
      {"preprocess", "Materialize min-max normalized cohorts"},
      {"quality", "Per-case MAE/MSE/PSNR/SSIM against the reference"},
      {"extract", "Radiomic feature tables for every cohort"},
      {"correlate", "Per-feature Spearman fidelity against the reference"},
      {"group", "Partition features by which networks preserve them"},
      {"classify", "Risk classification from features via PCA + random forest"},
      {"report", "Run every stage and write the full report"},
  };
  for (const auto& [name, desc] : pipeline_subs)
    add_pipeline_options(app.add_subcommand(name, desc), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    return dispatch(app, flags, plan_path, phantom_out, cases_opt, phantom_cases,
                    phantom_workers);
  } catch (const radfid::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const radfid::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
