// Copyright 2026 The Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "portune/portune.hpp"

namespace portune::cli {

// Stable process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kIngest = 2, kTune = 3, kEvaluate = 4 };

// Failure carrying the exit code of the stage it belongs to.
class CommandError : public Error {
 public:
  CommandError(int code, const std::string& what) : Error(what), code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

struct DatasetArgs {
  std::string path;
  std::string format = "auto";
  std::string kernel_family = "xgemm";
  std::string precision = "32";
};

struct ScopeArgs {
  std::string devices;
  std::string inputs;
};

struct JobArgs {
  std::string method = "stochastic";
  std::string objective = "library";
  std::string kappa = "1";
  std::uint64_t seed = 0;
  double budget_ms = 30'000.0;
  std::string fleet;
  std::size_t max_restarts = StochasticOptions{}.max_restarts;
  std::size_t patience = StochasticOptions{}.patience;
  std::uint64_t cap = 10'000'000;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "3", "1,2,4" or "1..10".
inline std::vector<std::size_t> parse_kappas(const std::string& s) {
  std::vector<std::size_t> out;
  for (const std::string& part : split_list(s)) {
    const auto dots = part.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(std::stoul(part));
      } else {
        const std::size_t lo = std::stoul(part.substr(0, dots));
        const std::size_t hi = std::stoul(part.substr(dots + 2));
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
      }
    } catch (const std::logic_error&) {
      throw CommandError(kUsage, "malformed kappa list '" + s + "'");
    }
  }
  if (out.empty()) throw CommandError(kUsage, "empty kappa list");
  for (std::size_t k : out) {
    if (k == 0) throw CommandError(kUsage, "kappa must be >= 1");
  }
  return out;
}

inline std::ifstream open_input(const std::string& path, int code) {
  if (path.empty()) throw CommandError(code, "no input path given");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(code, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CommandError(kUsage, "cannot write '" + path.string() + "'");
  return out;
}

struct Loaded {
  PerformanceDataset dataset;
  std::optional<ClblastWarnings> warnings;
};

// "auto": .csv is CSV; JSON carrying the canonical format tag is canonical,
// any other JSON is treated as a CLBlast database.
inline std::string detect_format(const std::string& path, const std::string& text) {
  if (std::filesystem::path(path).extension() == ".csv") return "csv";
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos || (text[first] != '{' && text[first] != '[')) return "csv";
  const nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_object() && doc.value("format", std::string()) == "portune-dataset") return "canonical";
  return "clblast";
}

inline Loaded load_dataset(const DatasetArgs& args) {
  std::ifstream file = open_input(args.path, kIngest);
  std::stringstream in;
  in << file.rdbuf();
  const std::string format = args.format == "auto" ? detect_format(args.path, in.str()) : args.format;
  try {
    if (format == "csv") return {ingest_csv(in), std::nullopt};
    if (format == "canonical") return {read_canonical(in), std::nullopt};
    if (format == "clblast") {
      ClblastOptions opts;
      opts.kernel_family = args.kernel_family;
      opts.precision = args.precision;
      ClblastIngest r = ingest_clblast_db(in, opts);
      return {std::move(r.dataset), r.warnings};
    }
  } catch (const IngestError& e) {
    throw CommandError(kIngest, args.path + ": " + e.what());
  }
  throw CommandError(kUsage, "unknown format '" + format + "'");
}

inline Scope resolve_scope(const SlowdownMatrix& sm, const ScopeArgs& args, int code) {
  const auto devs = split_list(args.devices);
  std::set<KernelInput> inputs;
  try {
    for (const std::string& key : split_list(args.inputs)) inputs.insert(KernelInput::parse(key));
  } catch (const Error& e) {
    throw CommandError(kUsage, e.what());
  }
  const std::set<std::string> devices(devs.begin(), devs.end());
  Scope s = filter_scope(sm, devices, inputs);
  if (s.empty()) throw CommandError(code, "scope filters match no environments");
  return s;
}

inline Objective resolve_objective(const JobArgs& args, const SlowdownMatrix& sm, const Scope& scope, int code) {
  if (args.objective == "library") return Objective::library();
  if (args.objective != "fleet") throw CommandError(kUsage, "unknown objective '" + args.objective + "'");
  if (args.fleet.empty()) return Objective::fleet_rate(uniform_fleet(sm, scope));
  std::ifstream in = open_input(args.fleet, code);
  try {
    return Objective::fleet_rate(read_fleet(in));
  } catch (const Error& e) {
    throw CommandError(code, args.fleet + ": " + e.what());
  }
}

inline SelectionJob make_job(const JobArgs& args, const Scope& scope, Objective objective) {
  SelectionJob job;
  job.scope = scope;
  job.objective = std::move(objective);
  try {
    job.method = method_from_string(args.method);
  } catch (const Error& e) {
    throw CommandError(kUsage, e.what());
  }
  job.kappa = parse_kappas(args.kappa).front();
  job.seed = args.seed;
  job.budget_ms = args.budget_ms;
  job.enumeration_cap = args.cap;
  job.stochastic.max_restarts = args.max_restarts;
  job.stochastic.patience = args.patience;
  return job;
}

inline void add_dataset_options(CLI::App* cmd, DatasetArgs& d) {
  cmd->add_option("--dataset", d.path, "Dataset file")->required();
  cmd->add_option("--format", d.format, "auto, csv, clblast or canonical")
      ->check(CLI::IsMember({"auto", "csv", "clblast", "canonical"}));
  cmd->add_option("--kernel-family", d.kernel_family, "Kernel family kept from a CLBlast database");
  cmd->add_option("--precision", d.precision, "Precision kept from a CLBlast database (empty keeps all)");
}

inline void add_scope_options(CLI::App* cmd, ScopeArgs& s) {
  cmd->add_option("--devices", s.devices, "Comma-separated device allowlist");
  cmd->add_option("--inputs", s.inputs, "Comma-separated MxNxK input allowlist");
}

inline void add_job_options(CLI::App* cmd, JobArgs& j) {
  cmd->add_option("--method", j.method, "exhaustive, stochastic, kmeans or tree");
  cmd->add_option("--objective", j.objective, "library or fleet")->check(CLI::IsMember({"library", "fleet"}));
  cmd->add_option("--kappa", j.kappa, "Variant budget; lists like 1,2,4 or 1..10 for sweeps");
  cmd->add_option("--seed", j.seed, "Seed for every random choice");
  cmd->add_option("--budget-ms", j.budget_ms, "Wall-clock limit per selection");
  cmd->add_option("--fleet", j.fleet, "Fleet quantity JSON (default: every quantity 1)");
  cmd->add_option("--max-restarts", j.max_restarts, "Stochastic search restarts");
  cmd->add_option("--patience", j.patience, "Stochastic restarts without improvement before stopping");
  cmd->add_option("--cap", j.cap, "Exhaustive enumeration cap");
}

inline void print_summary(std::ostream& out, const PerformanceDataset& ds, const std::optional<ClblastWarnings>& w) {
  out << "records: " << ds.records().size() << "\n";
  out << "environments: " << ds.num_environments() << ", variants: " << ds.variants().size() << "\n";
  out << "devices: " << ds.devices().size() << ", param_arity: " << ds.param_arity()
      << ", timing: " << to_string(ds.timing_statistic()) << "\n";
  out << "device,inputs,variants,entries\n";
  std::map<std::string, std::set<KernelInput>> inputs;
  std::map<std::string, std::set<ParamConfig>> variants;
  std::map<std::string, std::size_t> entries;
  for (const TuningRecord& r : ds.records()) {
    inputs[r.env.device].insert(r.env.input);
    variants[r.env.device].insert(r.config);
    ++entries[r.env.device];
  }
  for (const auto& [name, n] : entries) {
    out << name << ',' << inputs[name].size() << ',' << variants[name].size() << ',' << n << "\n";
  }
  if (w) {
    out << "pruned: missing_driver=" << w->missing_driver << " missing_input=" << w->missing_input
        << " duplicate_device=" << w->duplicate_device << " arity_mismatch=" << w->arity_mismatch
        << " bad_results=" << w->bad_results << "\n";
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Selects budgeted sets of kernel variants that perform well across devices and inputs"};
  app.require_subcommand(1);
  std::size_t workers = 0;
  bool no_timestamp = false;

  DatasetArgs ingest_ds;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "Validate a dataset and write the canonical form");
  add_dataset_options(ingest, ingest_ds);
  ingest->add_option("--out", ingest_out, "Canonical dataset output path");

  SyntheticSpec gen;
  std::uint64_t gen_seed = 0;
  std::string gen_out, gen_structure = "planted", gen_blocks = "m", gen_format = "canonical";
  auto* generate = app.add_subcommand("generate", "Write a synthetic benchmark dataset");
  generate->add_option("--out", gen_out, "Output path")->required();
  generate->add_option("--format", gen_format, "canonical or csv")->check(CLI::IsMember({"canonical", "csv"}));
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--structure", gen_structure, "planted or latent")->check(CLI::IsMember({"planted", "latent"}));
  generate->add_option("--num-devices", gen.devices, "Device count");
  generate->add_option("--num-inputs", gen.inputs, "Inputs per device (0: full 64-point grid)");
  generate->add_option("--num-variants", gen.variants, "Variant count");
  generate->add_option("--planted", gen.planted, "Planted specialist count");
  generate->add_option("--gap", gen.gap, "Minimum slowdown of non-specialists");
  generate->add_option("--blocks", gen_blocks, "Planted block rule: m, device or index")
      ->check(CLI::IsMember({"m", "device", "index"}));
  generate->add_option("--missing", gen.missing_fraction, "Fraction of non-oracle cells dropped");

  DatasetArgs tune_ds;
  ScopeArgs tune_scope;
  JobArgs tune_job;
  std::string tune_out = ".";
  auto* tune = app.add_subcommand("tune", "Select a variant set and write the result and convergence log");
  add_dataset_options(tune, tune_ds);
  add_scope_options(tune, tune_scope);
  add_job_options(tune, tune_job);
  tune->add_option("--out", tune_out, "Output directory");

  auto* evaluate = app.add_subcommand("evaluate", "Figures of merit for selections");
  evaluate->require_subcommand(1);

  DatasetArgs rep_ds;
  ScopeArgs rep_scope;
  std::string rep_result, rep_fleet, rep_out = ".";
  auto* report = evaluate->add_subcommand("report", "Evaluate a tune result");
  add_dataset_options(report, rep_ds);
  add_scope_options(report, rep_scope);
  report->add_option("--result", rep_result, "Result JSON written by tune")->required();
  report->add_option("--fleet", rep_fleet, "Fleet quantity JSON; adds the fleet rate");
  report->add_option("--out", rep_out, "Output directory");

  DatasetArgs sw_ds;
  ScopeArgs sw_scope;
  JobArgs sw_job;
  std::size_t sw_runs = 30;
  bool sw_same_seed = false;
  std::string sw_out = ".";
  auto* sweep = evaluate->add_subcommand("sweep", "Geomean slowdown against code divergence");
  add_dataset_options(sweep, sw_ds);
  add_scope_options(sweep, sw_scope);
  add_job_options(sweep, sw_job);
  sweep->add_option("--runs", sw_runs, "Repetitions per point");
  sweep->add_flag("--same-seed", sw_same_seed, "Reuse --seed for every repetition");
  sweep->add_option("--out", sw_out, "Output directory");

  DatasetArgs ho_ds;
  ScopeArgs ho_scope;
  JobArgs ho_job;
  std::string ho_train, ho_out = ".";
  std::size_t ho_runs = 30;
  bool ho_unseen = false;
  auto* holdout = evaluate->add_subcommand("holdout", "Tune on some devices, evaluate on others");
  add_dataset_options(holdout, ho_ds);
  add_scope_options(holdout, ho_scope);
  add_job_options(holdout, ho_job);
  holdout->add_option("--train-devices", ho_train, "Comma-separated training devices")->required();
  holdout->add_flag("--unseen", ho_unseen, "Require training and evaluation devices to be disjoint");
  holdout->add_option("--runs", ho_runs, "Repetitions");
  holdout->add_option("--out", ho_out, "Output directory");

  DatasetArgs fl_ds;
  ScopeArgs fl_scope;
  JobArgs fl_job;
  std::string fl_methods = "stochastic,kmeans,tree", fl_out = ".";
  std::size_t fl_runs = 30;
  auto* fleet = evaluate->add_subcommand("fleet", "Fleet task rate per method against per-device tuning");
  add_dataset_options(fleet, fl_ds);
  add_scope_options(fleet, fl_scope);
  add_job_options(fleet, fl_job);
  fleet->add_option("--methods", fl_methods, "Comma-separated methods");
  fleet->add_option("--runs", fl_runs, "Repetitions per method");
  fleet->add_option("--out", fl_out, "Output directory");

  for (CLI::App* cmd : {tune, sweep, holdout, fleet}) {
    cmd->add_option("--workers", workers, "Parallel repetitions (0: all cores; 1: run-order deterministic)");
    cmd->add_flag("--no-timestamp", no_timestamp, "Omit wall-clock fields from outputs");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) {
      Loaded l = load_dataset(ingest_ds);
      if (!ingest_out.empty()) {
        std::ofstream f = open_output(ingest_out);
        write_canonical(f, l.dataset);
      }
      print_summary(out, l.dataset, l.warnings);
      return kOk;
    }

    if (*generate) {
      gen.structure = gen_structure == "latent" ? SyntheticStructure::kLatent : SyntheticStructure::kPlanted;
      gen.blocks = gen_blocks == "device" ? BlockRule::kDevice
                   : gen_blocks == "index" ? BlockRule::kEnvironmentIndex
                                           : BlockRule::kInputM;
      SyntheticDataset syn = [&] {
        try {
          return generate_synthetic(gen, gen_seed);
        } catch (const Error& e) {
          throw CommandError(kUsage, e.what());
        }
      }();
      std::ofstream f = open_output(gen_out);
      if (gen_format == "csv") {
        write_csv(f, syn.dataset);
      } else {
        write_canonical(f, syn.dataset);
      }
      print_summary(out, syn.dataset, std::nullopt);
      for (const ParamConfig& c : syn.planted) out << "planted: " << c.to_string() << "\n";
      return kOk;
    }

    if (*tune) {
      const Loaded l = load_dataset(tune_ds);
      const SlowdownMatrix sm = build_slowdown_matrix(l.dataset);
      const Scope scope = resolve_scope(sm, tune_scope, kTune);
      SelectionResult r;
      SelectionJob job;
      try {
        job = make_job(tune_job, scope, resolve_objective(tune_job, sm, scope, kTune));
        r = select(sm, job);
      } catch (const PreconditionError& e) {
        throw CommandError(kTune, e.what());
      } catch (const ScopeError& e) {
        throw CommandError(kTune, e.what());
      }
      const std::filesystem::path dir(tune_out);
      {
        std::ofstream f = open_output(dir / "result.json");
        f << result_to_json(r, !no_timestamp).dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "job.json");
        f << job_to_json(job, sm).dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "convergence.csv");
        write_iteration_log(f, r, !no_timestamp);
      }
      out << "method: " << to_string(r.method) << ", kappa: " << r.kappa << ", chosen: " << r.chosen.size()
          << ", cost: " << r.cost << "\n";
      for (const ParamConfig& c : r.chosen_configs) out << "variant: " << c.to_string() << "\n";
      return kOk;
    }

    if (*report) {
      const Loaded l = load_dataset(rep_ds);
      const SlowdownMatrix sm = build_slowdown_matrix(l.dataset);
      std::ifstream rin = open_input(rep_result, kEvaluate);
      SelectionResult r;
      EvaluationReport rep;
      try {
        nlohmann::json doc;
        rin >> doc;
        r = result_from_json(doc);
        Scope scope;
        if (rep_scope.devices.empty() && rep_scope.inputs.empty()) {
          std::vector<Environment> envs;
          for (const auto& [env, v] : r.winners) envs.push_back(env);
          scope = scope_of(sm, envs);
        } else {
          scope = resolve_scope(sm, rep_scope, kEvaluate);
        }
        std::optional<FleetSpec> fleet_spec;
        if (!rep_fleet.empty()) {
          std::ifstream fin = open_input(rep_fleet, kEvaluate);
          fleet_spec = read_fleet(fin);
        }
        rep = portune::evaluate(r, sm, scope, fleet_spec);
      } catch (const nlohmann::json::exception& e) {
        throw CommandError(kEvaluate, rep_result + ": " + e.what());
      } catch (const CommandError&) {
        throw;
      } catch (const Error& e) {
        throw CommandError(kEvaluate, e.what());
      }
      const std::filesystem::path dir(rep_out);
      {
        std::ofstream f = open_output(dir / "report.json");
        f << report_to_json(rep).dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "cdf.csv");
        write_cdf_csv(f, rep);
      }
      out << "geomean: " << rep.geomean << ", median: " << rep.median << ", environments: " << rep.per_env.size()
          << "\n";
      if (rep.fleet_rate) out << "fleet_rate_per_ms: " << *rep.fleet_rate << "\n";
      return kOk;
    }

    if (*sweep) {
      const Loaded l = load_dataset(sw_ds);
      const SlowdownMatrix sm = build_slowdown_matrix(l.dataset);
      const Scope scope = resolve_scope(sm, sw_scope, kEvaluate);
      SweepOptions opts;
      opts.kappas = parse_kappas(sw_job.kappa);
      opts.runs = sw_runs;
      opts.vary_seeds = !sw_same_seed;
      opts.workers = workers;
      std::vector<EvaluationReport> reports;
      try {
        for (const std::string& m : split_list(sw_job.method)) opts.methods.push_back(method_from_string(m));
        JobArgs first = sw_job;
        first.method = split_list(sw_job.method).front();
        const SelectionJob templ = make_job(first, scope, resolve_objective(sw_job, sm, scope, kEvaluate));
        reports = divergence_sweep(sm, templ, opts);
      } catch (const CommandError&) {
        throw;
      } catch (const Error& e) {
        throw CommandError(kEvaluate, e.what());
      }
      const std::filesystem::path dir(sw_out);
      {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& r : reports) j.push_back(report_to_json(r));
        std::ofstream f = open_output(dir / "sweep.json");
        f << j.dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "sweep.csv");
        write_sweep_csv(f, reports);
      }
      for (const auto& r : reports) {
        std::ofstream f = open_output(dir / ("cdf_" + std::string(to_string(r.method)) + "_k" +
                                             std::to_string(r.kappa) + ".csv"));
        write_cdf_csv(f, r);
      }
      write_sweep_csv(out, reports);
      return kOk;
    }

    if (*holdout) {
      const Loaded l = load_dataset(ho_ds);
      const SlowdownMatrix sm = build_slowdown_matrix(l.dataset);
      HoldoutOutcome h;
      try {
        HoldoutPlan plan;
        for (const std::string& d : split_list(ho_train)) plan.train_devices.insert(d);
        const Scope eval_scope = resolve_scope(sm, ho_scope, kEvaluate);
        for (std::size_t e : eval_scope) plan.eval_environments.push_back(sm.environments()[e]);
        plan.repetitions = ho_runs;
        plan.unseen = ho_unseen;
        if (!ho_unseen && ho_scope.devices.empty() && ho_scope.inputs.empty()) {
          throw CommandError(kEvaluate, "holdout needs --devices or --inputs to pick evaluation environments");
        }
        // Evaluation defaults to the devices not used for training.
        if (ho_unseen && ho_scope.devices.empty()) {
          plan.eval_environments.clear();
          for (std::size_t e : eval_scope) {
            if (plan.train_devices.count(sm.environments()[e].device) == 0) {
              plan.eval_environments.push_back(sm.environments()[e]);
            }
          }
        }
        const SelectionJob templ = make_job(ho_job, eval_scope, resolve_objective(ho_job, sm, eval_scope, kEvaluate));
        h = holdout_generalization(sm, plan, templ, workers);
      } catch (const CommandError&) {
        throw;
      } catch (const Error& e) {
        throw CommandError(kEvaluate, e.what());
      }
      const std::filesystem::path dir(ho_out);
      {
        std::ofstream f = open_output(dir / "holdout.json");
        f << holdout_to_json(h).dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "cdf_unseen.csv");
        write_cdf_csv(f, h.unseen);
      }
      {
        std::ofstream f = open_output(dir / "cdf_baseline.csv");
        write_cdf_csv(f, h.baseline);
      }
      out << "unseen geomean: " << h.unseen.geomean << " (mean " << h.unseen.mean_geomean.value_or(h.unseen.geomean)
          << ")\nbaseline geomean: " << h.baseline.geomean << " (mean "
          << h.baseline.mean_geomean.value_or(h.baseline.geomean) << ")\neval-device reads during selection: "
          << h.eval_device_reads << "\n";
      return kOk;
    }

    if (*fleet) {
      const Loaded l = load_dataset(fl_ds);
      const SlowdownMatrix sm = build_slowdown_matrix(l.dataset);
      const Scope scope = resolve_scope(sm, fl_scope, kEvaluate);
      std::vector<FleetRow> rows;
      try {
        JobArgs args = fl_job;
        args.objective = "fleet";
        const Objective obj = resolve_objective(args, sm, scope, kEvaluate);
        const SelectionJob templ = make_job(args, scope, obj);
        std::vector<Method> methods;
        for (const std::string& m : split_list(fl_methods)) methods.push_back(method_from_string(m));
        rows = fleet_experiment(sm, *obj.fleet, templ, methods, fl_runs, workers);
      } catch (const CommandError&) {
        throw;
      } catch (const Error& e) {
        throw CommandError(kEvaluate, e.what());
      }
      const std::filesystem::path dir(fl_out);
      {
        std::ofstream f = open_output(dir / "fleet.json");
        f << fleet_to_json(rows).dump(1) << "\n";
      }
      {
        std::ofstream f = open_output(dir / "fleet.csv");
        write_fleet_csv(f, rows);
      }
      write_fleet_csv(out, rows);
      return kOk;
    }
  } catch (const CommandError& e) {
    err << "error: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace portune::cli
