#include "radfid/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>

#include "radfid/csv.hpp"
#include "radfid/features.hpp"
#include "radfid/numeric.hpp"
#include "radfid/parallel.hpp"
#include "radfid/preprocess.hpp"
#include "radfid/volume_io.hpp"

namespace radfid {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

const std::set<std::string>& known_subcommands() {
  static const std::set<std::string> subs{"preprocess", "quality", "extract",
                                          "correlate", "group", "classify", "report"};
  return subs;
}

std::vector<std::string> stages_for(const std::string& subcommand) {
  if (subcommand == "preprocess") return {"preprocess"};
  if (subcommand == "quality") return {"quality"};
  if (subcommand == "extract") return {"extract"};
  if (subcommand == "correlate") return {"extract", "correlate"};
  if (subcommand == "group") return {"quality", "extract", "correlate", "group"};
  if (subcommand == "classify") return {"extract", "classify"};
  return {"quality", "extract", "correlate", "group", "classify"};
}

void validate_cohort_name(const std::string& name) {
  require(!name.empty(), "network name must not be empty");
  require(name != "reference", "network name 'reference' is reserved");
  for (char c : name)
    require(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.',
            "network name may use only letters, digits, '_', '-', '.': " + name);
  require(name != "." && name != "..", "network name must not be a dot path");
}

void validate_run_config(const RunConfig& c) {
  require(known_subcommands().count(c.subcommand),
          "unknown subcommand: " + c.subcommand);
  require(!c.reference_manifest.empty(), "reference manifest path is required");
  require(!c.out_dir.empty(), "output directory is required");
  require(!c.networks.empty(), "at least one network manifest is required");
  std::set<std::string> names;
  for (const auto& [name, manifest] : c.networks) {
    validate_cohort_name(name);
    require(!manifest.empty(), "network manifest path is required: " + name);
    require(names.insert(name).second, "duplicate network name: " + name);
  }
  require(c.n_bins >= 2, "n_bins must be at least 2");
  require(std::isfinite(c.tau) && c.tau >= 0.0 && c.tau <= 1.0, "tau must lie in [0,1]");
  require(std::isfinite(c.ssim_cutoff) && c.ssim_cutoff >= 0.0 && c.ssim_cutoff <= 1.0,
          "ssim cutoff must lie in [0,1]");
  require(std::isfinite(c.variance_target) && c.variance_target > 0.0 &&
              c.variance_target <= 1.0,
          "variance target must lie in (0,1]");
  require(c.n_trees >= 1, "n_trees must be positive");
  require(c.min_leaf >= 1, "min_leaf must be positive");
  require(c.features_per_split >= 0, "features_per_split must be non-negative");
  require(!c.depth_grid.empty(), "depth grid must not be empty");
  for (int d : c.depth_grid) require(d >= 1, "depth grid entries must be positive");
  require(c.n_repeats >= 1, "n_repeats must be positive");
  require(c.val_fraction > 0.0 && c.test_fraction > 0.0 &&
              c.val_fraction + c.test_fraction < 1.0,
          "validation and test fractions must be positive and sum below 1");
  require(c.workers >= 1, "workers must be positive");
}

template <typename Fn>
void run_stage(const char* tag, Fn&& fn) {
  try {
    fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(tag, e.what());
  }
}

struct LoadedCohort {
  std::vector<CaseRecord> records;  // reference case order
  std::vector<Volume> volumes;      // min-max normalized
  std::vector<Mask> masks;          // filled for the reference cohort only
};

struct QualityRow {
  std::string name;
  MeanSd mae, mse, ssim;
  std::vector<double> finite_psnrs;
  std::size_t n_cases = 0;
  double mean_ssim = 0.0;
};

// Lazily loaded inputs plus intermediate products shared between stages.
struct PipelineState {
  const RunConfig& config;
  std::map<std::string, LoadedCohort> cohorts;
  std::vector<std::string> ref_ids;
  std::map<std::string, FeatureTable> tables;
  std::vector<std::pair<std::string, CorrelationTable>> correlations;
  std::vector<QualityRow> quality_rows;
  std::map<std::string, ClassificationReport> classifications;

  explicit PipelineState(const RunConfig& c) : config(c) {}

  const LoadedCohort& cohort(const std::string& name, const char* stage) {
    const auto it = cohorts.find(name);
    if (it != cohorts.end()) return it->second;
    run_stage(stage, [&] { load(name); });
    return cohorts.at(name);
  }

 private:
  void load(const std::string& name) {
    std::filesystem::path manifest;
    if (name == "reference") {
      manifest = config.reference_manifest;
    } else {
      for (const auto& [net, path] : config.networks)
        if (net == name) manifest = path;
    }
    LoadedCohort lc;
    lc.records = read_manifest(manifest);
    require(!lc.records.empty(), "manifest lists no cases: " + manifest.string());

    if (name == "reference") {
      ref_ids.clear();
      for (const auto& rec : lc.records) ref_ids.push_back(rec.case_id);
    } else {
      // Align every network to the reference case order; sets must match.
      const auto& ref = cohorts.at("reference");
      std::map<std::string, std::size_t> where;
      for (std::size_t i = 0; i < lc.records.size(); ++i)
        where[lc.records[i].case_id] = i;
      require(lc.records.size() == ref.records.size(),
              "network '" + name + "' lists " + std::to_string(lc.records.size()) +
                  " cases, reference lists " + std::to_string(ref.records.size()));
      std::vector<CaseRecord> ordered;
      for (const auto& id : ref_ids) {
        const auto hit = where.find(id);
        require(hit != where.end(), "network '" + name + "' is missing case " + id);
        ordered.push_back(lc.records[hit->second]);
      }
      lc.records = std::move(ordered);
    }

    const std::size_t n = lc.records.size();
    lc.volumes.resize(n);
    if (name == "reference") lc.masks.resize(n);
    parallel_for_indexed(std::int64_t(n), config.workers, [&](std::int64_t i) {
      lc.volumes[i] = minmax_normalize(read_volume(lc.records[i].volume_path));
      if (name == "reference") lc.masks[i] = read_mask(lc.records[i].mask_path);
    });
    cohorts.emplace(name, std::move(lc));
  }
};

std::string rel_string(const std::filesystem::path& p, const std::filesystem::path& base) {
  return p.lexically_proximate(base).generic_string();
}

std::string render_csv(const CsvRows& rows) {
  std::string text;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      text += row[c];
    }
    text += '\n';
  }
  return text;
}

std::string format_mean_sd(const MeanSd& m) {
  return format_g9(m.mean) + "±" + format_g9(m.sd);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%d %H:%M:%S UTC", &tm);
  return buf;
}

}  // namespace

nlohmann::json run_config_to_json(const RunConfig& c) {
  nlohmann::json j;
  j["subcommand"] = c.subcommand;
  j["reference"] = c.reference_manifest.generic_string();
  nlohmann::json nets = nlohmann::json::array();
  for (const auto& [name, manifest] : c.networks)
    nets.push_back({{"name", name}, {"manifest", manifest.generic_string()}});
  j["networks"] = nets;
  j["out_dir"] = c.out_dir.generic_string();
  j["n_bins"] = c.n_bins;
  j["tau"] = c.tau;
  j["ssim_cutoff"] = c.ssim_cutoff;
  j["variance_target"] = c.variance_target;
  j["n_trees"] = c.n_trees;
  j["min_leaf"] = c.min_leaf;
  j["features_per_split"] = c.features_per_split;
  j["depth_grid"] = c.depth_grid;
  j["n_repeats"] = c.n_repeats;
  j["val_fraction"] = c.val_fraction;
  j["test_fraction"] = c.test_fraction;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  static const std::set<std::string> known{
      "subcommand", "reference", "networks",  "out_dir",    "n_bins",
      "tau",        "ssim_cutoff", "variance_target", "n_trees", "min_leaf",
      "features_per_split", "depth_grid", "n_repeats", "val_fraction",
      "test_fraction", "seed", "workers"};
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      throw ValidationError("unknown run config key: " + item.key());

  RunConfig c;
  try {
    if (j.count("subcommand")) c.subcommand = j.at("subcommand").get<std::string>();
    if (j.count("reference"))
      c.reference_manifest = j.at("reference").get<std::string>();
    if (j.count("networks")) {
      const auto& nets = j.at("networks");
      if (!nets.is_array())
        throw ValidationError("networks must be an array of {name, manifest}");
      for (const auto& entry : nets) {
        if (!entry.is_object() || !entry.count("name") || !entry.count("manifest") ||
            entry.size() != 2)
          throw ValidationError("networks entries must be {name, manifest} objects");
        c.networks.emplace_back(entry.at("name").get<std::string>(),
                                entry.at("manifest").get<std::string>());
      }
    }
    if (j.count("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
    if (j.count("n_bins")) c.n_bins = j.at("n_bins").get<int>();
    if (j.count("tau")) c.tau = j.at("tau").get<double>();
    if (j.count("ssim_cutoff")) c.ssim_cutoff = j.at("ssim_cutoff").get<double>();
    if (j.count("variance_target")) c.variance_target = j.at("variance_target").get<double>();
    if (j.count("n_trees")) c.n_trees = j.at("n_trees").get<int>();
    if (j.count("min_leaf")) c.min_leaf = j.at("min_leaf").get<int>();
    if (j.count("features_per_split"))
      c.features_per_split = j.at("features_per_split").get<int>();
    if (j.count("depth_grid")) c.depth_grid = j.at("depth_grid").get<std::vector<int>>();
    if (j.count("n_repeats")) c.n_repeats = j.at("n_repeats").get<int>();
    if (j.count("val_fraction")) c.val_fraction = j.at("val_fraction").get<double>();
    if (j.count("test_fraction")) c.test_fraction = j.at("test_fraction").get<double>();
    if (j.count("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.count("workers")) c.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run config: ") + e.what());
  }
  return c;
}

namespace {

FeatureTable build_feature_table(const LoadedCohort& cohort, const LoadedCohort& reference,
                                 const RunConfig& config) {
  const std::size_t n = cohort.records.size();
  std::vector<FeatureVector> rows(n);
  parallel_for_indexed(std::int64_t(n), config.workers, [&](std::int64_t i) {
    rows[i] = extract_all(cohort.volumes[i], reference.masks[i], config.n_bins);
  });
  FeatureTable t;
  t.feature_ids = rows.front().ids;
  t.values.resize(Eigen::Index(n), Eigen::Index(t.feature_ids.size()));
  for (std::size_t i = 0; i < n; ++i) {
    t.case_ids.push_back(cohort.records[i].case_id);
    for (std::size_t f = 0; f < rows[i].values.size(); ++f)
      t.values(Eigen::Index(i), Eigen::Index(f)) = rows[i].values[f];
  }
  return t;
}

void rename_into_place(const std::filesystem::path& path) {
  std::filesystem::rename(std::filesystem::path(path.string() + ".partial"), path);
}

}  // namespace

RunArtifacts run_pipeline(const RunConfig& config) {
  validate_run_config(config);
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec)
    throw ValidationError("cannot create output directory " + config.out_dir.string() +
                          ": " + ec.message());

  // The sentinel marks an unfinished run; it disappears on success.
  const auto sentinel = config.out_dir / "run.partial";
  {
    std::ofstream mark(sentinel);
    if (!mark) throw ValidationError("output directory is not writable: " +
                                     config.out_dir.string());
    mark << "run in progress\n";
  }

  RunArtifacts art;
  PipelineState state(config);
  std::vector<NetworkProfile>& profiles = art.profiles;

  for (const std::string& stage : stages_for(config.subcommand)) {
    if (stage == "preprocess") {
      run_stage("preprocess", [&] {
        const auto& ref = state.cohort("reference", "preprocess");
        const auto write_tree = [&](const std::string& name, const LoadedCohort& lc) {
          const auto dir = config.out_dir / "preprocessed" / name;
          std::filesystem::create_directories(dir / "volumes");
          std::filesystem::create_directories(dir / "masks");
          std::vector<CaseRecord> records(lc.records.size());
          parallel_for_indexed(std::int64_t(lc.records.size()), config.workers,
                               [&](std::int64_t i) {
                                 CaseRecord rec = lc.records[i];
                                 rec.volume_path = dir / "volumes" / (rec.case_id + ".json");
                                 rec.mask_path = dir / "masks" / (rec.case_id + ".json");
                                 write_volume(lc.volumes[i], rec.volume_path);
                                 write_mask(ref.masks[i], rec.mask_path);
                                 records[i] = std::move(rec);
                               });
          write_manifest(dir / "manifest.csv", records);
          art.preprocessed.emplace_back(
              name, rel_string(dir / "manifest.csv", config.out_dir));
        };
        write_tree("reference", ref);
        for (const auto& [name, manifest] : config.networks)
          write_tree(name, state.cohort(name, "preprocess"));
      });
    } else if (stage == "quality") {
      run_stage("quality", [&] {
        std::filesystem::create_directories(config.out_dir / "quality");
        const auto& ref = state.cohort("reference", "quality");
        for (const auto& [name, manifest] : config.networks) {
          const auto& net = state.cohort(name, "quality");
          const std::size_t n = ref.records.size();
          std::vector<QualityReport> reports(n);
          parallel_for_indexed(std::int64_t(n), config.workers, [&](std::int64_t i) {
            reports[i] = quality_report(ref.volumes[i], net.volumes[i]);
          });
          const auto csv = config.out_dir / "quality" / (name + ".csv");
          write_quality_csv(csv, state.ref_ids, reports);
          art.quality_csv.emplace_back(name, rel_string(csv, config.out_dir));

          QualityRow row;
          row.name = name;
          row.n_cases = n;
          std::vector<double> maes, mses, ssims;
          for (const auto& q : reports) {
            maes.push_back(q.mae);
            mses.push_back(q.mse);
            ssims.push_back(q.ssim);
            if (std::isfinite(q.psnr_db)) row.finite_psnrs.push_back(q.psnr_db);
          }
          row.mae = mean_sd(maes);
          row.mse = mean_sd(mses);
          row.ssim = mean_sd(ssims);
          row.mean_ssim = row.ssim.mean;
          state.quality_rows.push_back(row);
          profiles.push_back(make_network_profile(name, row.mean_ssim, config.ssim_cutoff));
        }
      });
    } else if (stage == "extract") {
      run_stage("extract", [&] {
        std::filesystem::create_directories(config.out_dir / "features");
        const auto& ref = state.cohort("reference", "extract");
        const auto extract_one = [&](const std::string& name, const LoadedCohort& lc) {
          FeatureTable t = build_feature_table(lc, ref, config);
          const auto csv = config.out_dir / "features" / (name + ".csv");
          write_feature_table(t, std::filesystem::path(csv.string() + ".partial"));
          rename_into_place(csv);
          art.feature_csv.emplace_back(name, rel_string(csv, config.out_dir));
          state.tables.emplace(name, std::move(t));
        };
        extract_one("reference", ref);
        for (const auto& [name, manifest] : config.networks)
          extract_one(name, state.cohort(name, "extract"));
      });
    } else if (stage == "correlate") {
      run_stage("correlate", [&] {
        std::filesystem::create_directories(config.out_dir / "correlation");
        const auto& ref_table = state.tables.at("reference");
        for (const auto& [name, manifest] : config.networks) {
          CorrelationTable ct =
              correlate_cohorts(ref_table, state.tables.at(name), config.workers);
          const auto csv = config.out_dir / "correlation" / (name + ".csv");
          write_correlation_table(ct, std::filesystem::path(csv.string() + ".partial"));
          rename_into_place(csv);
          art.correlation_csv.emplace_back(name, rel_string(csv, config.out_dir));
          state.correlations.emplace_back(name, std::move(ct));
        }
      });
    } else if (stage == "group") {
      run_stage("group", [&] {
        std::vector<CorrelationTable> tables;
        for (const auto& [name, ct] : state.correlations) tables.push_back(ct);
        art.groups = assign_groups(tables, profiles, config.tau);

        const auto path = config.out_dir / "groups.json";
        write_text_atomic(
            path, group_assignment_to_json(art.groups, profiles, config.ssim_cutoff).dump(2) +
                      "\n");
        art.groups_json = rel_string(path, config.out_dir);

        CsvRows rows;
        rows.push_back({"group", "network", "n_features", "mean_abs_rho", "sd_abs_rho"});
        for (const auto& cell : art.groups.summary)
          rows.push_back({std::to_string(cell.group), cell.network_id,
                          std::to_string(cell.n_features), format_g9(cell.mean_abs_rho),
                          format_g9(cell.sd_abs_rho)});
        const auto csv = config.out_dir / "groups_summary.csv";
        write_text_atomic(csv, render_csv(rows));
        art.groups_summary_csv = rel_string(csv, config.out_dir);
      });
    } else if (stage == "classify") {
      run_stage("classify", [&] {
        std::filesystem::create_directories(config.out_dir / "classification");
        const auto& ref = state.cohort("reference", "classify");
        std::map<std::string, RiskLabel> labels;
        for (const auto& rec : ref.records) {
          require(rec.label.has_value(),
                  "classification needs a label for every case; missing for " + rec.case_id);
          labels[rec.case_id] = *rec.label;
        }
        EvalConfig ec_ml;
        ec_ml.variance_target = config.variance_target;
        ec_ml.hp.n_trees = config.n_trees;
        ec_ml.hp.min_leaf = config.min_leaf;
        ec_ml.hp.features_per_split = config.features_per_split;
        ec_ml.depth_grid = config.depth_grid;
        ec_ml.n_repeats = config.n_repeats;
        ec_ml.val_fraction = config.val_fraction;
        ec_ml.test_fraction = config.test_fraction;
        ec_ml.seed = config.seed;
        ec_ml.workers = config.workers;

        const auto classify_one = [&](const std::string& name) {
          const Dataset data = make_dataset(state.tables.at(name), labels);
          const ClassificationReport rep = evaluate(data, ec_ml);
          const auto path = config.out_dir / "classification" / (name + ".json");
          write_text_atomic(path, classification_report_to_json(rep).dump(2) + "\n");
          art.classification_json.emplace_back(name, rel_string(path, config.out_dir));
          state.classifications.emplace(name, rep);
        };
        classify_one("reference");
        for (const auto& [name, manifest] : config.networks) classify_one(name);
      });
    }
    art.stages_run.push_back(stage);
  }

  // Markdown report: tables for whichever stages ran. The timestamp below is
  // the only content allowed to differ between identical runs.
  std::string md;
  md += "# Imaging fidelity report\n\n";
  md += "Generated: " + utc_timestamp() + "\n\n";
  md += "Reference cohort of " + std::to_string(state.cohorts.at("reference").records.size()) +
        " cases compared against " + std::to_string(config.networks.size()) +
        " translation network(s).\n";

  if (!state.quality_rows.empty()) {
    md += "\n## Image quality\n\n";
    md += "| Network | MAE | MSE | PSNR (dB) | SSIM | High performance |\n";
    md += "|---|---|---|---|---|---|\n";
    for (std::size_t i = 0; i < state.quality_rows.size(); ++i) {
      const auto& row = state.quality_rows[i];
      const std::string psnr_cell =
          row.finite_psnrs.empty() ? "inf±0" : format_mean_sd(mean_sd(row.finite_psnrs));
      md += "| " + row.name + " | " + format_mean_sd(row.mae) + " | " +
            format_mean_sd(row.mse) + " | " + psnr_cell + " | " + format_mean_sd(row.ssim) +
            " | " + (profiles[i].high_performance ? "yes" : "no") + " |\n";
    }
    md += "\nCells are mean ± sample SD over cases; the PSNR mean covers finite values "
          "only. High performance means mean SSIM above " +
          format_g9(config.ssim_cutoff) + ".\n";
  }

  if (!state.correlations.empty()) {
    md += "\n## Feature fidelity\n\n";
    md += "| Network | excellent | good | moderate | poor |\n";
    md += "|---|---|---|---|---|\n";
    for (const auto& [name, ct] : state.correlations) {
      int counts[4] = {0, 0, 0, 0};
      for (const auto& rec : ct.records) counts[int(rec.band)]++;
      md += "| " + name + " | " + std::to_string(counts[int(CorrelationBand::excellent)]) +
            " | " + std::to_string(counts[int(CorrelationBand::good)]) + " | " +
            std::to_string(counts[int(CorrelationBand::moderate)]) + " | " +
            std::to_string(counts[int(CorrelationBand::poor)]) + " |\n";
    }
    md += "\nAgreement bands on |rho|: poor below 0.5, moderate below 0.75, good below "
          "0.9, excellent at or above 0.9.\n";
  }

  if (!art.groups.feature_ids.empty()) {
    md += "\n## Feature groups\n\n";
    md += "Detection threshold tau = " + format_g9(art.groups.tau) + " on |rho|.\n\n";
    md += "| Group | Features |";
    for (const auto& [name, manifest] : config.networks) md += " " + name + " |";
    md += "\n|---|---|";
    for (std::size_t i = 0; i < config.networks.size(); ++i) md += "---|";
    md += "\n";
    const char* labels[3] = {"1 (broadly preserved)", "2 (high-performance only)",
                             "3 (preserved nowhere)"};
    const std::size_t n_nets = config.networks.size();
    for (int g = 0; g < 3; ++g) {
      md += "| " + std::string(labels[g]) + " | " +
            std::to_string(art.groups.group_sizes[g]) + " |";
      for (std::size_t n = 0; n < n_nets; ++n) {
        const auto& cell = art.groups.summary[g * n_nets + n];
        md += " " + (cell.n_features > 0
                         ? format_g9(cell.mean_abs_rho) + "±" + format_g9(cell.sd_abs_rho)
                         : std::string("-")) +
              " |";
      }
      md += "\n";
    }
    md += "\nCells are mean ± sample SD of |rho| inside the group.\n";
  }

  if (!state.classifications.empty()) {
    md += "\n## Outcome classification\n\n";
    md += "| Cohort | Accuracy | AUC | Pooled AUC |\n";
    md += "|---|---|---|---|\n";
    const auto add_row = [&](const std::string& name) {
      const auto& rep = state.classifications.at(name);
      md += "| " + name + " | " + format_g9(rep.accuracy_mean) + "±" +
            format_g9(rep.accuracy_sd) + " | " + format_g9(rep.auc_mean) + "±" +
            format_g9(rep.auc_sd) + " | " + format_g9(rep.pooled_auc) + " |\n";
    };
    add_row("reference");
    for (const auto& [name, manifest] : config.networks) add_row(name);
    md += "\nMean ± sample SD over " + std::to_string(config.n_repeats) +
          " stratified train/validation/test repeats.\n";
  }

  md += "\n## Artifacts\n\n";
  const auto list_map = [&](const char* title,
                            const std::vector<std::pair<std::string, std::string>>& items) {
    for (const auto& [name, rel] : items)
      md += "- " + std::string(title) + " " + name + ": `" + rel + "`\n";
  };
  list_map("preprocessed", art.preprocessed);
  list_map("quality", art.quality_csv);
  list_map("features", art.feature_csv);
  list_map("correlation", art.correlation_csv);
  if (!art.groups_json.empty()) md += "- groups: `" + art.groups_json + "`\n";
  if (!art.groups_summary_csv.empty())
    md += "- group summary: `" + art.groups_summary_csv + "`\n";
  list_map("classification", art.classification_json);

  const auto md_path = config.out_dir / "report.md";
  write_text_atomic(md_path, md);
  art.report_md = rel_string(md_path, config.out_dir);

  // Machine-readable summary naming every produced file.
  nlohmann::json summary;
  summary["schema_version"] = 1;
  summary["subcommand"] = config.subcommand;
  summary["config"] = run_config_to_json(config);
  nlohmann::json networks = nlohmann::json::array();
  for (const auto& [name, manifest] : config.networks) networks.push_back(name);
  summary["networks"] = networks;
  summary["stages"] = art.stages_run;

  nlohmann::json artifacts = nlohmann::json::object();
  const auto put_map = [&](const char* key,
                           const std::vector<std::pair<std::string, std::string>>& items) {
    if (items.empty()) return;
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [name, rel] : items) m[name] = rel;
    artifacts[key] = m;
  };
  put_map("preprocessed", art.preprocessed);
  put_map("quality", art.quality_csv);
  put_map("features", art.feature_csv);
  put_map("correlation", art.correlation_csv);
  if (!art.groups_json.empty()) artifacts["groups"] = art.groups_json;
  if (!art.groups_summary_csv.empty()) artifacts["groups_summary"] = art.groups_summary_csv;
  put_map("classification", art.classification_json);
  artifacts["report"] = art.report_md;
  summary["artifacts"] = artifacts;

  if (!state.quality_rows.empty()) {
    nlohmann::json q = nlohmann::json::object();
    for (std::size_t i = 0; i < state.quality_rows.size(); ++i)
      q[state.quality_rows[i].name] = {
          {"mean_ssim", state.quality_rows[i].mean_ssim},
          {"high_performance", profiles[i].high_performance}};
    summary["quality"] = q;
  }
  if (!art.groups.feature_ids.empty())
    summary["group_sizes"] = {art.groups.group_sizes[0], art.groups.group_sizes[1],
                              art.groups.group_sizes[2]};
  if (!state.classifications.empty()) {
    nlohmann::json cl = nlohmann::json::object();
    for (const auto& [name, rep] : state.classifications)
      cl[name] = {{"accuracy_mean", rep.accuracy_mean},
                  {"accuracy_sd", rep.accuracy_sd},
                  {"auc_mean", rep.auc_mean},
                  {"auc_sd", rep.auc_sd},
                  {"pooled_auc", rep.pooled_auc}};
    summary["classification"] = cl;
  }

  validate_with_schema(summary, summary_schema());
  const auto summary_path = config.out_dir / "summary.json";
  write_text_atomic(summary_path, summary.dump(2) + "\n");
  art.summary_json = rel_string(summary_path, config.out_dir);

  std::filesystem::remove(sentinel);
  return art;
}

}  // namespace radfid
