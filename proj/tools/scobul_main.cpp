#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "scobul/config.hpp"
#include "scobul/errors.hpp"
#include "scobul/io.hpp"
#include "scobul/optimize.hpp"
#include "scobul/pipeline.hpp"
#include "scobul/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string arm = "scobul";
  std::string signal_dir;
  std::string phase_lengths;
  std::optional<std::uint64_t> seed;
};

scobul::PlasticityArm parse_arm(const std::string& arm) {
  if (arm == "scobul") return scobul::PlasticityArm::Scobul;
  if (arm == "stdp") return scobul::PlasticityArm::StdpBaseline;
  throw scobul::ConfigError("arm must be 'scobul' or 'stdp', got '" + arm + "'");
}

std::uint64_t effective_seed(const scobul::Config& cfg, const CommonArgs& args) {
  if (args.seed) return *args.seed;
  return static_cast<std::uint64_t>(cfg.get_int("experiment.seed", 1));
}

void apply_phase_override(scobul::Config& cfg, const std::string& lengths) {
  if (lengths.empty()) return;
  std::vector<std::int64_t> vals;
  std::string token;
  std::istringstream in(lengths);
  while (std::getline(in, token, ',')) {
    try {
      vals.push_back(std::stoll(token));
    } catch (const std::exception&) {
      throw scobul::ConfigError("--phase-lengths: '" + token + "' is not a number");
    }
  }
  const bool dvs =
      scobul::experiment_kind_from_config(cfg) == scobul::ExperimentKind::Dvs;
  if (dvs && vals.size() == 3) {
    cfg.set_number("experiment.train_steps", static_cast<double>(vals[0]));
    cfg.set_number("experiment.rf_steps", static_cast<double>(vals[1]));
    cfg.set_number("experiment.test_steps", static_cast<double>(vals[2]));
  } else if (!dvs && vals.size() == 2) {
    cfg.set_number("experiment.train_steps", static_cast<double>(vals[0]));
    cfg.set_number("experiment.test_steps", static_cast<double>(vals[1]));
  } else {
    throw scobul::ConfigError(
        "--phase-lengths expects 'train,rf,test' for dvs or 'train,test' for cluster");
  }
}

/// A signal plus whichever ground truth its kind carries, and input hashes.
struct LoadedSignal {
  scobul::EventStream events;
  scobul::Trajectory trajectory;      // dvs
  scobul::GroundTruthLog truth;       // cluster
  ordered_json provenance;            // hashes + where it came from
};

LoadedSignal generate_signal(const scobul::Config& cfg, std::uint64_t root,
                             scobul::Timestep duration) {
  LoadedSignal sig;
  const auto kind = scobul::experiment_kind_from_config(cfg);
  if (kind == scobul::ExperimentKind::Cluster) {
    const auto spec =
        scobul::cluster_spec_from_config(cfg, scobul::seed_stream(root, "signal"));
    auto gen = scobul::gen_cluster_signal(spec, duration);
    sig.events = std::move(gen.events);
    sig.truth = std::move(gen.truth);
  } else {
    scobul::CalibrationResult cal;
    auto gen = scobul::generate_dvs_signal_from_config(cfg, root, duration, &cal);
    sig.events = std::move(gen.events);
    sig.trajectory = std::move(gen.trajectory);
    sig.provenance["calibration"] = {{"brightness_rate_scale", cal.brightness_rate_scale},
                                     {"change_threshold", cal.change_threshold},
                                     {"mean_rate_hz", cal.mean_rate_hz}};
  }
  sig.provenance["source"] = "generated";
  return sig;
}

LoadedSignal load_signal(const scobul::Config& cfg, const std::string& dir) {
  LoadedSignal sig;
  const auto kind = scobul::experiment_kind_from_config(cfg);
  const auto events_path = (fs::path(dir) / "signal.events").string();
  sig.events = scobul::read_event_stream(events_path);
  sig.provenance["source"] = dir;
  sig.provenance["events_hash"] = scobul::hash_hex(scobul::content_hash_file(events_path));
  if (kind == scobul::ExperimentKind::Dvs) {
    const auto traj_path = (fs::path(dir) / "signal.trajectory").string();
    sig.trajectory = scobul::read_trajectory(traj_path);
    sig.provenance["trajectory_hash"] =
        scobul::hash_hex(scobul::content_hash_file(traj_path));
  } else {
    const auto iv_path = (fs::path(dir) / "signal.intervals").string();
    sig.truth = scobul::read_intervals(iv_path);
    sig.provenance["intervals_hash"] = scobul::hash_hex(scobul::content_hash_file(iv_path));
  }
  return sig;
}

std::string events_hash(const LoadedSignal& sig) {
  if (sig.provenance.contains("events_hash"))
    return sig.provenance["events_hash"].get<std::string>();
  // generated in memory: hash the canonical serialization
  std::string body = "scobul-events 1\n";
  body += "channels=" + std::to_string(sig.events.n_channels) + "\n";
  body += "duration=" + std::to_string(sig.events.duration) + "\n";
  for (const auto& ev : sig.events.events)
    body += std::to_string(ev.t) + "," + std::to_string(ev.source) + "\n";
  return scobul::hash_hex(scobul::content_hash_bytes(body));
}

void write_manifest(const fs::path& out, const std::string& command,
                    const std::string& arm, std::uint64_t root,
                    const scobul::Config& cfg, const LoadedSignal& sig,
                    const std::vector<std::string>& outputs) {
  ordered_json doc;
  doc["schema"] = "scobul-manifest/1";
  doc["command"] = command;
  doc["arm"] = arm;
  doc["root_seed"] = root;
  doc["config"] = ordered_json(cfg.entries());
  doc["signal"] = sig.provenance;
  doc["signal"]["events_hash"] = events_hash(sig);
  doc["outputs"] = outputs;
  scobul::write_text_file((out / "manifest.json").string(), doc.dump(2) + "\n");
}

int cmd_signal(const CommonArgs& args) {
  auto cfg = scobul::Config::parse_file(args.config_path);
  const auto root = effective_seed(cfg, args);
  cfg.set_number("experiment.seed", static_cast<double>(root));
  const auto duration = cfg.get_int("signal.duration");
  const auto sig = generate_signal(cfg, root, duration);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  std::vector<std::string> outputs = {"signal.events"};
  scobul::write_event_stream((out / "signal.events").string(), sig.events);
  if (scobul::experiment_kind_from_config(cfg) == scobul::ExperimentKind::Dvs) {
    scobul::write_trajectory((out / "signal.trajectory").string(), sig.trajectory);
    outputs.push_back("signal.trajectory");
  } else {
    scobul::write_intervals((out / "signal.intervals").string(), sig.truth);
    outputs.push_back("signal.intervals");
  }

  ordered_json doc;
  doc["schema"] = "scobul-signal/1";
  doc["kind"] = cfg.get_string("experiment.kind");
  doc["root_seed"] = root;
  doc["channels"] = sig.events.n_channels;
  doc["duration"] = sig.events.duration;
  doc["events"] = sig.events.events.size();
  doc["provenance"] = sig.provenance;
  doc["events_hash"] = events_hash(sig);
  doc["config"] = ordered_json(cfg.entries());
  scobul::write_text_file((out / "signal.json").string(), doc.dump(2) + "\n");
  std::cout << "signal: " << sig.events.events.size() << " events over "
            << sig.events.duration << " steps, " << sig.events.n_channels
            << " channels -> " << args.out_dir << "\n";
  return 0;
}

ordered_json metrics_common(const std::string& arm, const LoadedSignal& sig,
                            const std::vector<std::uint64_t>& spike_counts,
                            std::uint64_t reborn) {
  ordered_json doc;
  doc["schema"] = "scobul-metrics/1";
  doc["arm"] = arm;
  doc["signal_hash"] = events_hash(sig);
  doc["reborn_neurons"] = reborn;
  doc["spike_counts"] = spike_counts;
  return doc;
}

int cmd_experiment(const CommonArgs& args) {
  auto cfg = scobul::Config::parse_file(args.config_path);
  apply_phase_override(cfg, args.phase_lengths);
  const auto root = effective_seed(cfg, args);
  cfg.set_number("experiment.seed", static_cast<double>(root));
  const auto arm = parse_arm(args.arm);
  const auto setup = scobul::setup_from_config(cfg, arm);
  const auto kind = scobul::experiment_kind_from_config(cfg);

  const LoadedSignal sig = args.signal_dir.empty()
                               ? generate_signal(cfg, root, setup.phases.total())
                               : load_signal(cfg, args.signal_dir);
  const scobul::IndexedEvents indexed(sig.events);
  const auto weight_seed = scobul::seed_stream(root, "weights", 0);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  ordered_json metrics;

  scobul::Network net = scobul::make_network(setup, weight_seed);
  if (kind == scobul::ExperimentKind::Dvs) {
    const auto context = scobul::make_dvs_eval_context(sig.trajectory);
    const auto train = net.run(indexed, setup.phases.train, true);
    const auto rf = net.run(indexed, setup.phases.rf, false);
    const auto test = net.run(indexed, setup.phases.test, false);

    std::vector<std::uint64_t> counts(setup.network.n_neurons, 0);
    scobul::EventStream spikes;
    spikes.n_channels = setup.network.n_neurons;
    spikes.duration = setup.phases.total();
    for (const auto* log : {&train, &rf, &test})
      for (const auto& ev : log->neuron_spikes) {
        ++counts[ev.source];
        spikes.events.push_back(ev);
      }

    const auto rf_fields = scobul::receptive_centers(
        rf.neuron_spikes, sig.trajectory, context.metric, setup.phases.train,
        setup.phases.train + setup.phases.rf, setup.network.n_neurons);
    if (rf_fields.centers.empty())
      throw scobul::DegenerateRun("no neuron fired in the receptive-field segment");
    const auto test_begin = setup.phases.train + setup.phases.rf;
    const auto predictions = scobul::predict_positions(
        test.neuron_spikes, rf_fields.centers, test_begin,
        test_begin + setup.phases.test, setup.decode_window);
    const auto nmsd =
        scobul::normalized_msd(predictions, sig.trajectory, context.metric,
                               test_begin, setup.decode_window, context.centroid);

    metrics = metrics_common(args.arm, sig, counts, train.reborn_neurons);
    metrics["kind"] = "dvs";
    metrics["normalized_msd"] = nmsd.value;
    metrics["coverage"] = nmsd.coverage;
    metrics["windows_used"] = nmsd.windows_used;
    metrics["windows_total"] = nmsd.windows_total;
    auto& centers = metrics["receptive_centers"] = ordered_json::array();
    for (const auto& c : rf_fields.centers)
      centers.push_back({{"neuron", c.neuron_id},
                         {"support", c.support},
                         {"center", c.center}});
    metrics["silent_neurons"] = rf_fields.silent_neurons;
    scobul::write_event_stream((out / "neuron_spikes.events").string(), spikes);
    std::cout << "normalized_msd " << nmsd.value << " coverage " << nmsd.coverage
              << "\n";
  } else {
    const auto train = net.run(indexed, setup.phases.train, true);
    const auto test = net.run(indexed, setup.phases.test, false);
    std::vector<std::uint64_t> counts(setup.network.n_neurons, 0);
    scobul::EventStream spikes;
    spikes.n_channels = setup.network.n_neurons;
    spikes.duration = setup.phases.total();
    for (const auto* log : {&train, &test})
      for (const auto& ev : log->neuron_spikes) {
        ++counts[ev.source];
        spikes.events.push_back(ev);
      }
    const auto report = scobul::cluster_recognition_report(
        test.neuron_spikes, sig.truth, setup.phases.train,
        setup.phases.train + setup.phases.test, setup.network.n_neurons,
        setup.high_f1_threshold);

    metrics = metrics_common(args.arm, sig, counts, train.reborn_neurons);
    metrics["kind"] = "cluster";
    metrics["mean_matched_f1"] = report.mean_matched_f1;
    auto& matches = metrics["matching"] = ordered_json::array();
    for (const auto& match : report.matching)
      matches.push_back(
          {{"neuron", match.neuron}, {"cluster", match.cluster}, {"f1", match.f1}});
    metrics["unrecognized_clusters"] = report.unrecognized_clusters;
    metrics["contested_clusters"] = report.contested_clusters;
    metrics["ambiguous_neurons"] = report.ambiguous_neurons;
    scobul::write_event_stream((out / "neuron_spikes.events").string(), spikes);
    std::cout << "mean_matched_f1 " << report.mean_matched_f1 << "\n";
  }

  scobul::write_text_file((out / "metrics.json").string(), metrics.dump(2) + "\n");
  scobul::write_snapshot((out / "snapshot.json").string(), net);
  write_manifest(out, "experiment", args.arm, root, cfg, sig,
                 {"metrics.json", "snapshot.json", "neuron_spikes.events"});
  return 0;
}

int cmd_optimize(const CommonArgs& args) {
  auto cfg = scobul::Config::parse_file(args.config_path);
  apply_phase_override(cfg, args.phase_lengths);
  const auto root = effective_seed(cfg, args);
  cfg.set_number("experiment.seed", static_cast<double>(root));
  const auto arm = parse_arm(args.arm);
  if (scobul::experiment_kind_from_config(cfg) != scobul::ExperimentKind::Dvs)
    throw scobul::ConfigError(
        "optimize drives the dvs pipeline; set experiment.kind = dvs");

  const auto base_setup = scobul::setup_from_config(cfg, arm);
  const LoadedSignal sig = args.signal_dir.empty()
                               ? generate_signal(cfg, root, base_setup.phases.total())
                               : load_signal(cfg, args.signal_dir);
  const scobul::IndexedEvents indexed(sig.events);
  const auto context = scobul::make_dvs_eval_context(sig.trajectory);
  const auto space =
      scobul::filter_search_space(scobul::search_space_from_config(cfg), arm);
  const auto ga = scobul::ga_from_config(cfg, root);

  std::vector<std::uint64_t> weight_seeds;
  for (std::uint32_t k = 0; k < ga.seeds_per_fitness; ++k)
    weight_seeds.push_back(scobul::seed_stream(root, "weights", k));

  const scobul::FitnessFn fitness =
      [&](const scobul::Genome& genome) -> std::optional<double> {
    try {
      const auto run_cfg = scobul::apply_genome(cfg, space, genome);
      const auto setup = scobul::setup_from_config(run_cfg, arm);
      double sum = 0.0;
      for (const auto ws : weight_seeds) {
        const auto result =
            scobul::run_dvs_experiment(setup, indexed, sig.trajectory, context, ws);
        sum += result.nmsd.value;
      }
      return sum / static_cast<double>(weight_seeds.size());
    } catch (const scobul::DegenerateRun&) {
      return std::nullopt;
    } catch (const std::invalid_argument&) {
      return std::nullopt;  // genome decoded into an invalid combination
    }
  };

  const auto result = scobul::ga_run(space, ga, fitness);

  fs::create_directories(args.out_dir);
  const fs::path out(args.out_dir);
  scobul::write_history((out / "history.csv").string(), result, args.arm,
                        events_hash(sig));

  ordered_json best;
  best["schema"] = "scobul-best/1";
  best["arm"] = args.arm;
  best["fitness"] = result.best_fitness;
  best["evaluations"] = result.evaluations;
  best["degenerate_runs"] = result.degenerate_runs;
  best["genome01"] = result.best_genome;
  auto& decoded = best["decoded"] = ordered_json::object();
  for (std::size_t i = 0; i < space.entries.size(); ++i)
    decoded[space.entries[i].name] =
        scobul::decode_gene(space.entries[i], result.best_genome[i]);
  scobul::write_text_file((out / "best.json").string(), best.dump(2) + "\n");
  write_manifest(out, "optimize", args.arm, root, cfg, sig,
                 {"history.csv", "best.json"});

  std::cout << "best fitness " << result.best_fitness << " after "
            << result.history.size() << " generations (" << result.evaluations
            << " evaluations)\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
  struct Row {
    std::string file, type, arm, signal;
    double value = 0.0;
    std::string extra;
  };
  std::vector<Row> rows;
  std::vector<scobul::HistoryFile> histories;
  std::vector<std::string> history_names;

  for (const auto& path : inputs) {
    Row row;
    row.file = path;
    const auto text = scobul::read_text_file(path);
    if (text.rfind("# scobul-history 1", 0) == 0) {
      auto hist = scobul::read_history(path);
      if (hist.rows.empty()) throw scobul::FormatError(path + ": empty history");
      row.type = "history";
      row.arm = hist.arm;
      row.signal = hist.signal_hash;
      row.value = hist.rows.back().best;
      row.extra = std::to_string(hist.rows.size()) + " generations";
      history_names.push_back(fs::path(path).stem().string() + ":" + hist.arm);
      histories.push_back(std::move(hist));
    } else {
      ordered_json doc;
      try {
        doc = ordered_json::parse(text);
      } catch (const std::exception& e) {
        throw scobul::FormatError(path + ": not a history or metrics file");
      }
      if (doc.value("schema", "") != "scobul-metrics/1")
        throw scobul::FormatError(path + ": unsupported schema '" +
                                  doc.value("schema", "<missing>") + "'");
      row.type = "metrics";
      row.arm = doc.value("arm", "?");
      row.signal = doc.value("signal_hash", "?");
      if (doc["kind"] == "dvs") {
        row.value = doc["normalized_msd"].get<double>();
        row.extra = "coverage " + std::to_string(doc["coverage"].get<double>());
      } else {
        row.value = doc["mean_matched_f1"].get<double>();
        row.extra = "cluster";
      }
    }
    rows.push_back(std::move(row));
  }

  for (const auto& row : rows)
    if (row.signal != rows.front().signal)
      throw scobul::FormatError("report: inputs disagree on the signal: '" +
                                rows.front().file + "' has " + rows.front().signal +
                                ", '" + row.file + "' has " + row.signal);

  std::ostringstream table;
  table << "file\ttype\tarm\tvalue\tnotes\n";
  for (const auto& row : rows)
    table << row.file << "\t" << row.type << "\t" << row.arm << "\t" << row.value
          << "\t" << row.extra << "\n";

  std::ostringstream plot;
  plot << "series,generation,best\n";
  for (std::size_t h = 0; h < histories.size(); ++h)
    for (const auto& r : histories[h].rows)
      plot << history_names[h] << "," << r.generation << "," << r.best << "\n";

  fs::create_directories(out_dir);
  scobul::write_text_file((fs::path(out_dir) / "report.tsv").string(), table.str());
  scobul::write_text_file((fs::path(out_dir) / "plot.csv").string(), plot.str());
  std::cout << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scobul: spiking WTA network simulator and experiment harness"};
  app.require_subcommand(1);

  CommonArgs args;
  std::vector<std::string> report_inputs;

  auto add_common = [&](CLI::App* cmd, bool needs_arm) {
    cmd->add_option("--config", args.config_path, "configuration file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory")->required();
    cmd->add_option("--seed", args.seed, "override experiment.seed");
    if (needs_arm)
      cmd->add_option("--arm", args.arm, "plasticity arm: scobul | stdp")->required();
  };

  auto* signal = app.add_subcommand("signal", "generate and persist an input signal");
  add_common(signal, false);

  auto* experiment =
      app.add_subcommand("experiment", "run train/evaluate phases and score");
  add_common(experiment, true);
  experiment->add_option("--signal", args.signal_dir,
                         "replay a signal directory written by 'signal'");
  experiment->add_option("--phase-lengths", args.phase_lengths,
                         "override phases: train,rf,test (dvs) or train,test (cluster)");

  auto* optimize = app.add_subcommand("optimize", "genetic hyperparameter search");
  add_common(optimize, true);
  optimize->add_option("--signal", args.signal_dir,
                       "replay a signal directory written by 'signal'");
  optimize->add_option("--phase-lengths", args.phase_lengths,
                       "override phases: train,rf,test");

  auto* report = app.add_subcommand("report", "tabulate metrics/history files");
  report->add_option("inputs", report_inputs, "metrics.json / history.csv files")
      ->required();
  report->add_option("--out", args.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
    if (signal->parsed()) return cmd_signal(args);
    if (experiment->parsed()) return cmd_experiment(args);
    if (optimize->parsed()) return cmd_optimize(args);
    if (report->parsed()) return cmd_report(report_inputs, args.out_dir);
    return 1;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "E_USAGE: " << e.what() << "\n";
    return 2;
  } catch (const scobul::ConfigError& e) {
    std::cerr << "E_CONFIG: " << e.what() << "\n";
  } catch (const scobul::FormatError& e) {
    std::cerr << "E_FORMAT: " << e.what() << "\n";
  } catch (const scobul::IoError& e) {
    std::cerr << "E_IO: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "E_RUNTIME: " << e.what() << "\n";
  }
  return 1;
}
