#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "convote/errors.hpp"
#include "convote/pipeline.hpp"

namespace {

using convote::ConfigError;
using nlohmann::json;

struct RunConfig {
  std::filesystem::path corpus_dir;
  bool synthetic = false;
  convote::SyntheticSpec synthetic_spec;
  std::array<double, 3> ratios = {0.7, 0.2, 0.1};
  std::uint64_t split_seed = 0;
  convote::ExperimentConfig experiment;
  std::filesystem::path results_path;
  std::filesystem::path reference_audit_path;
  std::filesystem::path model_out;
  std::filesystem::path agreement_model_out;
  std::filesystem::path vocab_out;
};

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw convote::ParseError(path.string() + ": " + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const json config = load_json(path);
  RunConfig run;
  try {
    if (config.contains("corpus_dir"))
      run.corpus_dir = config["corpus_dir"].get<std::string>();
    if (config.contains("synthetic")) {
      run.synthetic = true;
      run.synthetic_spec =
          convote::parse_synthetic_spec_json(config["synthetic"].dump());
    }
    if (config.contains("ratios")) {
      const auto& ratios = config["ratios"];
      if (!ratios.is_array() || ratios.size() != 3)
        throw ConfigError("ratios must be an array of three fractions");
      for (int i = 0; i < 3; ++i) run.ratios[static_cast<std::size_t>(i)] = ratios[i];
    }
    if (config.contains("split_seed"))
      run.split_seed = config["split_seed"].get<std::uint64_t>();
    if (config.contains("variant"))
      run.experiment.variant =
          convote::parse_variant(config["variant"].get<std::string>());
    if (config.contains("theta_mode")) {
      const auto mode = config["theta_mode"].get<std::string>();
      if (mode == "ZERO")
        run.experiment.theta_mode = convote::ThetaMode::Zero;
      else if (mode == "MEAN")
        run.experiment.theta_mode = convote::ThetaMode::Mean;
      else
        throw ConfigError("theta_mode must be ZERO or MEAN");
    }
    if (config.contains("alpha")) {
      if (config["alpha"].is_string()) {
        if (config["alpha"].get<std::string>() != "TUNE")
          throw ConfigError("alpha must be a number or \"TUNE\"");
        run.experiment.tune = true;
      } else {
        run.experiment.alpha = config["alpha"].get<double>();
      }
    }
    if (config.contains("c")) run.experiment.c = config["c"].get<double>();
    if (config.contains("seed"))
      run.experiment.seed = config["seed"].get<std::uint64_t>();
    if (config.contains("results"))
      run.results_path = config["results"].get<std::string>();
    if (config.contains("reference_audit"))
      run.reference_audit_path = config["reference_audit"].get<std::string>();
    if (config.contains("model_out"))
      run.model_out = config["model_out"].get<std::string>();
    if (config.contains("agreement_model_out"))
      run.agreement_model_out = config["agreement_model_out"].get<std::string>();
    if (config.contains("vocab_out"))
      run.vocab_out = config["vocab_out"].get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (run.corpus_dir.empty() && !run.synthetic)
    throw ConfigError("config needs either corpus_dir or a synthetic block");
  run.experiment.validate();
  return run;
}

convote::CorpusSplit build_split(const RunConfig& run) {
  std::vector<convote::Debate> debates =
      run.synthetic
          ? convote::generate_synthetic_corpus(run.synthetic_spec,
                                               run.experiment.seed)
          : convote::parse_corpus(run.corpus_dir);
  return convote::split_debates(std::move(debates), run.ratios, run.split_seed);
}

void print_split_summary(const convote::SplitEval& split) {
  std::printf("  %-4s accuracy %7.2f%%  (%ld/%ld segments)\n",
              split.split_name.c_str(), split.accuracy_percent, split.n_correct,
              split.n_segments);
  if (split.agreement_accuracy_percent)
    std::printf("       agreement accuracy %.2f%%\n",
                *split.agreement_accuracy_percent);
  if (split.link_precision_percent)
    std::printf("       link precision %.2f%% over %ld links\n",
                *split.link_precision_percent, split.links_emitted);
  for (const auto& warning : split.warnings)
    std::printf("       warning: %s\n", warning.c_str());
}

void emit_report(const RunConfig& run, const convote::EvalReport& report) {
  std::printf("variant %s", convote::variant_name(report.config.variant));
  if (convote::variant_uses_agreement(report.config.variant))
    std::printf("  theta=%s alpha=%g",
                report.config.theta_mode.value_or(convote::ThetaMode::Zero) ==
                        convote::ThetaMode::Zero
                    ? "ZERO"
                    : "MEAN",
                report.chosen_alpha);
  std::printf("  c=%g seed=%llu\n", report.config.c,
              static_cast<unsigned long long>(report.config.seed));
  print_split_summary(report.dev);
  print_split_summary(report.test);

  if (!run.results_path.empty()) {
    std::ofstream out(run.results_path);
    if (!out) throw ConfigError("cannot write results file: " + run.results_path.string());
    convote::write_result_records(out, report);
  }
  if (!run.reference_audit_path.empty()) {
    std::ofstream out(run.reference_audit_path);
    if (!out)
      throw ConfigError("cannot write reference audit: " +
                        run.reference_audit_path.string());
    convote::write_reference_audit(out, report.dev.reference_audit);
    convote::write_reference_audit(out, report.test.reference_audit);
  }
}

int cmd_ingest(const std::filesystem::path& dir) {
  const auto debates = convote::parse_corpus(dir);
  long segments = 0, eval_segments = 0, eval_debates = 0;
  long speakers_total = 0;
  for (const auto& debate : debates) {
    segments += static_cast<long>(debate.segments.size());
    const auto filtered =
        convote::filter_segments(debate, convote::FilterPolicy::Evaluation);
    eval_segments += static_cast<long>(filtered.segments.size());
    if (!filtered.segments.empty()) ++eval_debates;
    std::set<std::string> speakers;
    for (const auto& segment : filtered.segments) speakers.insert(segment.speaker_id);
    speakers_total += static_cast<long>(speakers.size());
  }
  std::printf("debates                      %zu\n", debates.size());
  std::printf("segments (raw)               %ld\n", segments);
  std::printf("segments (evaluation filter) %ld\n", eval_segments);
  std::printf("debates with segments left   %ld\n", eval_debates);
  if (eval_debates > 0) {
    std::printf("avg segments per debate      %.1f\n",
                static_cast<double>(eval_segments) / eval_debates);
    std::printf("avg speakers per debate      %.1f\n",
                static_cast<double>(speakers_total) / eval_debates);
  }
  return 0;
}

int cmd_synth(const std::filesystem::path& config_path,
              const std::filesystem::path& out_dir, std::uint64_t seed) {
  const auto spec = convote::load_synthetic_spec(config_path);
  const auto debates = convote::generate_synthetic_corpus(spec, seed);
  convote::write_corpus(debates, out_dir);
  std::printf("wrote %zu debates to %s\n", debates.size(), out_dir.string().c_str());
  return 0;
}

int cmd_train(const std::filesystem::path& config_path) {
  const RunConfig run = load_run_config(config_path);
  const auto split = build_split(run);

  std::vector<convote::SpeechSegment> train_segments;
  for (const auto& debate : split.train) {
    const auto filtered =
        convote::filter_segments(debate, convote::FilterPolicy::Evaluation);
    train_segments.insert(train_segments.end(), filtered.segments.begin(),
                          filtered.segments.end());
  }
  const auto vocab = convote::build_vocabulary(train_segments);
  std::vector<convote::LabeledVector> examples;
  for (const auto& segment : train_segments) {
    if (!segment.vote) continue;
    examples.push_back({convote::vectorize_presence(segment.tokens, vocab),
                        *segment.vote == convote::Vote::Yea ? 1 : -1});
  }
  const auto model = convote::train_linear(examples, vocab.size(),
                                           run.experiment.c, run.experiment.seed);
  std::printf("trained segment model: %zu features, %zu examples, %d epochs\n",
              vocab.size(), examples.size(), model.training_meta.epochs);
  if (!run.vocab_out.empty()) vocab.save(run.vocab_out);
  if (!run.model_out.empty()) model.save(run.model_out);

  if (convote::variant_uses_agreement(run.experiment.variant) &&
      !run.agreement_model_out.empty()) {
    const auto ref_vocab = convote::build_reference_vocabulary(split.train);
    const auto agreement_model = convote::train_agreement_classifier(
        split.train, ref_vocab, run.experiment.c, run.experiment.seed + 1);
    agreement_model.save(run.agreement_model_out);
    std::printf("trained agreement model: %zu features\n", ref_vocab.size());
  }
  return 0;
}

int cmd_run(const std::filesystem::path& config_path) {
  const RunConfig run = load_run_config(config_path);
  const auto split = build_split(run);
  const auto report = convote::run_pipeline(run.experiment, split);
  emit_report(run, report);
  return 0;
}

int cmd_sweep_alpha(const std::filesystem::path& config_path) {
  RunConfig run = load_run_config(config_path);
  const auto split = build_split(run);
  auto config = run.experiment;
  config.tune = true;
  config.alpha.reset();
  const auto [alpha, report] = convote::tune_alpha(config, split);
  std::printf("selected alpha %g by dev accuracy\n", alpha);
  emit_report(run, report);
  return 0;
}

int cmd_report(const std::filesystem::path& results_path) {
  std::ifstream in(results_path);
  if (!in) throw ConfigError("cannot open results file: " + results_path.string());
  std::printf("%-28s %-6s %-6s %-6s %10s %10s %8s\n", "variant", "theta",
              "alpha", "split", "accuracy", "segments", "seed");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream record(line);
    std::string variant, theta, alpha, split, accuracy, segments, seed;
    if (!(std::getline(record, variant, '\t') && std::getline(record, theta, '\t') &&
          std::getline(record, alpha, '\t') && std::getline(record, split, '\t') &&
          std::getline(record, accuracy, '\t') &&
          std::getline(record, segments, '\t') && std::getline(record, seed)))
      throw convote::ParseError("malformed result record: " + line);
    std::printf("%-28s %-6s %-6s %-6s %10s %10s %8s\n", variant.c_str(),
                theta.c_str(), alpha.c_str(), split.c_str(), accuracy.c_str(),
                segments.c_str(), seed.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"support/oppose classification of debate speech segments"};
  app.require_subcommand(1);

  std::string ingest_dir, synth_config, synth_out, train_config, run_config,
      sweep_config, report_file;
  std::uint64_t synth_seed = 0;

  auto* ingest = app.add_subcommand("ingest", "parse a corpus and print statistics");
  ingest->add_option("dir", ingest_dir, "corpus directory")->required();
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("config", synth_config, "synthetic spec (JSON)")->required();
  synth->add_option("out-dir", synth_out, "output directory")->required();
  synth->add_option("--seed", synth_seed, "generator seed");
  auto* train = app.add_subcommand("train", "train and save models");
  train->add_option("config", train_config, "experiment config (JSON)")->required();
  auto* run = app.add_subcommand("run", "run a full experiment");
  run->add_option("config", run_config, "experiment config (JSON)")->required();
  auto* sweep = app.add_subcommand("sweep-alpha", "tune alpha on the dev split");
  sweep->add_option("config", sweep_config, "experiment config (JSON)")->required();
  auto* report = app.add_subcommand("report", "pretty-print a results file");
  report->add_option("results-file", report_file, "results records")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_dir);
    if (synth->parsed()) return cmd_synth(synth_config, synth_out, synth_seed);
    if (train->parsed()) return cmd_train(train_config);
    if (run->parsed()) return cmd_run(run_config);
    if (sweep->parsed()) return cmd_sweep_alpha(sweep_config);
    if (report->parsed()) return cmd_report(report_file);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
