#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "mfhb/diagnostics.hpp"
#include "mfhb/dynamics.hpp"
#include "mfhb/io.hpp"
#include "mfhb/parallel.hpp"
#include "mfhb/presets.hpp"
#include "mfhb/serialize.hpp"

namespace fs = std::filesystem;
using namespace mfhb;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitNumericalAbort = 3;

void setup_threads(int threads_flag) {
  if (threads_flag > 0) {
    set_thread_count(threads_flag);
    return;
  }
  if (const char* env = std::getenv("MFHB_THREADS")) {
    set_thread_count(std::max(1, std::atoi(env)));
    return;
  }
  set_thread_count(1);
}

int do_run(const std::string& config_path, const std::vector<std::string>& overrides,
           const std::string& out_dir, std::int64_t seed_flag) {
  FlatConfig flat;
  try {
    if (!config_path.empty()) flat = load_flat_config(config_path);
    for (const auto& kv : overrides) apply_override(flat, kv);
    if (seed_flag >= 0) flat["seed"] = std::to_string(seed_flag);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  ResolvedConfig rc;
  try {
    rc = resolve_config(flat);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    std::cerr << "config error: cannot create output directory: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    const Dataset data =
        sample_dataset(rc.run.d, rc.run.n0, rc.run.m, rc.dataset_seed, rc.run.activation,
                       rc.run.init_scale);
    RecordHook hook = nullptr;
    if (rc.free_energy_diagnostics) {
      ActivationSpec act{rc.run.activation};
      const RegularizerSpec reg = rc.run.regularizer;
      const double beta = rc.run.beta;
      hook = [&data, act, reg, beta](const Ensemble& ens, TrajectoryRecord& rec) {
        std::vector<std::vector<double>> joint(ens.size());
        for (int i = 0; i < ens.size(); ++i) {
          auto flat_theta = ens.particles[i].theta.flatten();
          flat_theta.insert(flat_theta.end(), ens.particles[i].r.begin(),
                            ens.particles[i].r.end());
          joint[i] = std::move(flat_theta);
        }
        const double entropy = knn_entropy(joint);
        rec.entropy_est = entropy;
        rec.free_energy_est = rec.loss + rec.kinetic - entropy / beta;
      };
    }
    const auto result = run_trajectory(rc.run, data, hook);

    write_text_file(fs::path(out_dir) / "trajectory.csv", trajectory_csv(result.records));
    write_text_file(fs::path(out_dir) / "marginals.csv", marginals_csv(result.final_ensemble));
    if (rc.free_energy_diagnostics) {
      nlohmann::json recs = nlohmann::json::array();
      for (const auto& r : result.records) {
        nlohmann::json row;
        row["run_id"] = rc.run.seed;
        row["step"] = r.step;
        row["entropy_est"] = r.entropy_est ? nlohmann::json(*r.entropy_est) : nullptr;
        row["free_energy_est"] =
            r.free_energy_est ? nlohmann::json(*r.free_energy_est) : nullptr;
        recs.push_back(std::move(row));
      }
      write_text_file(fs::path(out_dir) / "diagnostics.json", recs.dump(2) + "\n");
    }
    nlohmann::json meta;
    meta["config"] = to_json(rc.run);
    meta["dataset_seed"] = rc.dataset_seed;
    meta["diagnostics"] = {{"free_energy", rc.free_energy_diagnostics}};
    meta["version"] = MFHB_VERSION;
    write_text_file(fs::path(out_dir) / "meta.json", meta.dump(2) + "\n");
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumericalAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean-field heavy-ball training dynamics: runner and verification presets"};
  app.require_subcommand(1);

  int threads = 0;

  auto* run_cmd = app.add_subcommand("run", "run one trajectory from a config file");
  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::int64_t seed_flag = -1;
  run_cmd->add_option("--config", config_path, "flat key=value config file");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--seed", seed_flag, "override the seed");
  run_cmd->add_option("--set", overrides, "override, e.g. --set beta=16")->take_all();
  run_cmd->add_option("--threads", threads, "worker threads (or MFHB_THREADS)");

  auto* preset_cmd = app.add_subcommand("preset", "run a named verification preset");
  std::string preset_name, preset_out = "out";
  preset_cmd->add_option("name", preset_name, "preset name (see list-presets)")->required();
  preset_cmd->add_option("--out", preset_out, "output directory");
  preset_cmd->add_option("--threads", threads, "worker threads (or MFHB_THREADS)");

  auto* list_cmd = app.add_subcommand("list-presets", "list preset names");

  CLI11_PARSE(app, argc, argv);
  setup_threads(threads);

  if (list_cmd->parsed()) {
    for (const auto& name : kPresetNames) std::cout << name << "\n";
    return 0;
  }
  if (preset_cmd->parsed()) {
    if (std::find(kPresetNames.begin(), kPresetNames.end(), preset_name) == kPresetNames.end()) {
      std::cerr << "unknown preset: " << preset_name << "\n";
      return kExitConfigError;
    }
    try {
      return run_preset(preset_name, preset_out);
    } catch (const NumericalAbort& e) {
      std::cerr << "numerical abort: " << e.what() << "\n";
      return kExitNumericalAbort;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return do_run(config_path, overrides, out_dir, seed_flag);
}
