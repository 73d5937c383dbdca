#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpe/baselines.hpp"
#include "mpe/errors.hpp"
#include "mpe/evaluation.hpp"
#include "mpe/model_io.hpp"
#include "mpe/predictor.hpp"
#include "mpe/synthgen.hpp"
#include "mpe/trainer.hpp"
#include "mpe/trajectory.hpp"

namespace {

using json = nlohmann::json;

std::ofstream open_output(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw mpe::DataError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mpe::DataError("cannot open '" + path + "'");
  return in;
}

void write_config_sidecar(const std::string& out_path, const json& config) {
  auto f = open_output(out_path + ".config.json");
  f << config.dump(2) << '\n';
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

mpe::SplitRatios parse_split(const std::string& spec) {
  auto parts = split_on(spec, ':');
  if (parts.size() != 3) throw mpe::DataError("--split expects train:validation:test");
  try {
    return {std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])};
  } catch (const std::exception&) {
    throw mpe::DataError("--split expects three integers");
  }
}

void parse_window(const std::string& spec, mpe::TimeSlotting& slotting) {
  auto parts = split_on(spec, ':');
  if (parts.size() != 2) throw mpe::DataError("--window expects START:END in minutes");
  try {
    slotting.window_start_minute = std::stoi(parts[0]);
    slotting.window_end_minute = std::stoi(parts[1]);
  } catch (const std::exception&) {
    throw mpe::DataError("--window expects two integers");
  }
}

mpe::GridSpec parse_grid(const std::string& spec) {
  auto parts = split_on(spec, ':');
  if (parts.size() != 5)
    throw mpe::DataError("--grid expects minlat:maxlat:minlon:maxlon:cellsize");
  try {
    return {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2]),
            std::stod(parts[3]), std::stod(parts[4])};
  } catch (const std::exception&) {
    throw mpe::DataError("--grid expects five reals");
  }
}

mpe::ComponentMask parse_mask(const std::string& name) {
  if (name == "full") return {true, true};
  if (name == "object") return {true, false};
  if (name == "time") return {false, true};
  if (name == "plain") return {false, false};
  throw mpe::DataError("--mask must be full, object, time or plain");
}

const char* mask_name(const mpe::ComponentMask& m) {
  if (m.use_object && m.use_time) return "full";
  if (m.use_object) return "object";
  if (m.use_time) return "time";
  return "plain";
}

mpe::NegativeMode parse_negative_mode(const std::string& name) {
  if (name == "context") return mpe::NegativeMode::ContextExcluded;
  if (name == "true-only") return mpe::NegativeMode::TrueOnly;
  throw mpe::DataError("--negative-mode must be context or true-only");
}

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  mpe::SynthConfig config;
  std::string out;
};

void run_synth(const SynthArgs& args) {
  mpe::RoadGraph graph = mpe::generate_graph(args.config);
  std::vector<mpe::Record> records = mpe::generate_trajectories(graph, args.config);
  {
    auto out = open_output(args.out);
    mpe::write_records_csv(out, records);
  }
  {
    auto out = open_output(args.out + ".graph.json");
    mpe::write_graph_json(out, graph, args.config);
  }
  const auto& c = args.config;
  write_config_sidecar(args.out,
                       json{{"command", "synth"},
                            {"n_locations", c.n_locations},
                            {"out_degree", c.out_degree},
                            {"n_objects", c.n_objects},
                            {"n_slots", c.n_slots},
                            {"records_per_object", c.records_per_object},
                            {"object_signal", c.object_signal},
                            {"time_signal", c.time_signal},
                            {"seed", c.seed},
                            {"out", args.out}});
  mpe::TimeSlotting slotting = mpe::synth_slotting(args.config);
  std::cout << "wrote " << records.size() << " records for " << c.n_objects
            << " objects over " << c.n_locations << " locations ("
            << slotting.slot_minutes << "-minute slots) to " << args.out << '\n';
}

// --------------------------------------------------------------- ingest ----

struct IngestArgs {
  std::string input;
  std::string format = "triple";
  int slot_minutes = -1;  // -1: per-format default
  std::string window = "0:1440";
  std::string grid;
  int64_t max_gap = -1;  // -1: per-format default
  int64_t threshold = 1;
  int tz_offset = 0;
  bool drop_self_loops = false;
  std::string out;
};

void run_ingest(const IngestArgs& args) {
  if (args.format != "triple" && args.format != "gps")
    throw mpe::DataError("--format must be triple or gps");
  bool gps = args.format == "gps";
  if (gps && args.grid.empty()) throw mpe::DataError("--format gps requires --grid");

  mpe::QuadrupleBuildOptions opts;
  opts.slotting.slot_minutes = args.slot_minutes > 0 ? args.slot_minutes : (gps ? 15 : 30);
  parse_window(args.window, opts.slotting);
  opts.tz_offset_minutes = args.tz_offset;
  opts.max_gap_seconds = args.max_gap >= 0 ? args.max_gap
                                           : (gps ? 300 : mpe::kNoGapLimit);
  opts.drop_self_loops = args.drop_self_loops;
  opts.slotting.validate();

  std::vector<mpe::Record> records;
  size_t skipped = 0;
  {
    auto in = open_input(args.input);
    if (gps) {
      std::vector<mpe::GpsRecord> pings = mpe::parse_gps_csv(in);
      records = mpe::map_gps_records(pings, parse_grid(args.grid), &skipped);
      std::cout << "parsed " << pings.size() << " pings, " << skipped
                << " outside the grid\n";
    } else {
      records = mpe::parse_triple_csv(in);
      std::cout << "parsed " << records.size() << " records\n";
    }
  }

  std::vector<mpe::TokenQuadruple> quads = mpe::build_quadruples(std::move(records), opts);
  size_t before = quads.size();
  if (args.threshold > 1)
    quads = mpe::filter_by_transition_frequency(quads, args.threshold);
  if (quads.empty()) throw mpe::DataError("no quadruples survived preprocessing");

  {
    auto out = open_output(args.out);
    mpe::write_quadruples_csv(out, quads);
  }
  write_config_sidecar(args.out, json{{"command", "ingest"},
                                      {"input", args.input},
                                      {"format", args.format},
                                      {"slot_minutes", opts.slotting.slot_minutes},
                                      {"window", args.window},
                                      {"grid", args.grid},
                                      {"max_gap_seconds", opts.max_gap_seconds},
                                      {"threshold", args.threshold},
                                      {"tz_offset_minutes", args.tz_offset},
                                      {"drop_self_loops", args.drop_self_loops},
                                      {"out", args.out}});

  mpe::IndexedTrainingSet set = mpe::build_vocab_and_index(quads);
  std::cout << "built " << before << " quadruples, kept " << quads.size()
            << " after threshold " << args.threshold << '\n'
            << "vocabulary: " << set.vocab.objects.size() << " objects, "
            << set.vocab.slots.size() << " slots, "
            << set.vocab.currents.size() << " current locations, "
            << set.vocab.nexts.size() << " next locations\n";
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string input;
  std::string split = "8:1:1";
  mpe::Hyperparams hp;
  std::string mask = "full";
  std::string negative_mode = "context";
  std::string out;
};

void run_train(const TrainArgs& args) {
  mpe::ComponentMask mask = parse_mask(args.mask);
  mpe::Hyperparams hp = args.hp;
  hp.negative_mode = parse_negative_mode(args.negative_mode);

  std::vector<mpe::TokenQuadruple> quads;
  {
    auto in = open_input(args.input);
    quads = mpe::read_quadruples_csv(in);
  }
  mpe::SplitResult split = mpe::split_quadruples(quads, parse_split(args.split), hp.seed);
  mpe::IndexedTrainingSet set = mpe::build_vocab_and_index(split.train);
  std::cout << "training on " << split.train.size() << " quadruples ("
            << split.validation.size() << " validation, " << split.test.size()
            << " test held out)\n";

  std::vector<double> wall_seconds;
  auto epoch_start = std::chrono::steady_clock::now();
  mpe::TrainResult result = mpe::train(set, mask, hp, [&](int epoch, double ell) {
    auto now = std::chrono::steady_clock::now();
    double secs = std::chrono::duration<double>(now - epoch_start).count();
    epoch_start = now;
    wall_seconds.push_back(secs);
    std::printf("epoch %d  objective %.6f  (%.2fs)\n", epoch, ell, secs);
  });

  mpe::write_model_file(args.out, result.store, mask, set.vocab);
  {
    auto out = open_output(args.out + ".transitions.tsv");
    mpe::write_transitions_tsv(out, mpe::count_transitions(split.train));
  }
  {
    auto out = open_output(args.out + ".trainlog.tsv");
    out << "epoch\tobjective\twall_seconds\n";
    for (size_t e = 0; e < result.epoch_objectives.size(); ++e) {
      char secs[32];
      std::snprintf(secs, sizeof(secs), "%.3f", wall_seconds[e]);
      out << (e + 1) << '\t' << fmt_g17(result.epoch_objectives[e]) << '\t'
          << secs << '\n';
    }
  }
  {
    auto out = open_output(args.out + ".meta.json");
    out << json{{"dim", hp.dim},
                {"negatives", hp.negatives},
                {"lr", hp.lr},
                {"reg", hp.reg},
                {"epochs", hp.epochs},
                {"seed", hp.seed},
                {"early_stop_rel_tol", hp.early_stop_rel_tol},
                {"negative_mode", args.negative_mode},
                {"mask", mask_name(mask)},
                {"train_quadruples", split.train.size()},
                {"sgd_steps", result.sgd_steps},
                {"vocab", json{{"objects", set.vocab.objects.size()},
                               {"slots", set.vocab.slots.size()},
                               {"currents", set.vocab.currents.size()},
                               {"nexts", set.vocab.nexts.size()}}}}
               .dump(2)
        << '\n';
  }
  write_config_sidecar(args.out, json{{"command", "train"},
                                      {"input", args.input},
                                      {"split", args.split},
                                      {"dim", hp.dim},
                                      {"negatives", hp.negatives},
                                      {"lr", hp.lr},
                                      {"reg", hp.reg},
                                      {"epochs", hp.epochs},
                                      {"mask", args.mask},
                                      {"negative_mode", args.negative_mode},
                                      {"early_stop_rel_tol", hp.early_stop_rel_tol},
                                      {"seed", hp.seed},
                                      {"out", args.out}});
  std::cout << "model written to " << args.out << " (" << result.sgd_steps
            << " sgd steps)\n";
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateArgs {
  std::string input;
  std::string split = "8:1:1";
  mpe::Hyperparams hp;
  std::string models = "mpe,mm,bayes";
  int runs = 1;
  std::string ks = "1,2,3";
  double alpha = 1.0;
  bool full_vocab = false;
  std::string negative_mode = "context";
  std::string out;
};

void run_evaluate(const EvaluateArgs& args) {
  mpe::ExperimentConfig config;
  config.split = parse_split(args.split);
  config.split_seed = args.hp.seed;
  config.hyperparams = args.hp;
  config.hyperparams.negative_mode = parse_negative_mode(args.negative_mode);
  config.models = split_on(args.models, ',');
  config.runs = args.runs;
  config.ks.clear();
  for (const auto& k : split_on(args.ks, ',')) {
    try {
      config.ks.push_back(std::stoi(k));
    } catch (const std::exception&) {
      throw mpe::DataError("--k expects a comma-separated integer list");
    }
  }
  config.alpha = args.alpha;
  config.full_vocab = args.full_vocab;

  std::vector<mpe::TokenQuadruple> quads;
  {
    auto in = open_input(args.input);
    quads = mpe::read_quadruples_csv(in);
  }
  std::vector<mpe::ModelReport> reports = mpe::run_experiment(quads, config);
  {
    auto out = open_output(args.out);
    mpe::write_report_tsv(out, reports);
  }
  write_config_sidecar(args.out, json{{"command", "evaluate"},
                                      {"input", args.input},
                                      {"split", args.split},
                                      {"models", args.models},
                                      {"runs", args.runs},
                                      {"k", args.ks},
                                      {"alpha", args.alpha},
                                      {"full_vocab", args.full_vocab},
                                      {"negative_mode", args.negative_mode},
                                      {"dim", args.hp.dim},
                                      {"negatives", args.hp.negatives},
                                      {"lr", args.hp.lr},
                                      {"reg", args.hp.reg},
                                      {"epochs", args.hp.epochs},
                                      {"seed", args.hp.seed},
                                      {"out", args.out}});
  std::cout << mpe::format_report_table(reports);
  std::cout << "report written to " << args.out << '\n';
}

// -------------------------------------------------------------- predict ----

struct PredictArgs {
  std::string model;
  std::string input;
  int slot_minutes = 30;
  std::string window = "0:1440";
  int tz_offset = 0;
  int k = 3;
  bool full_vocab = false;
  std::string out;
};

void run_predict(const PredictArgs& args) {
  mpe::SavedModel saved = mpe::read_model_file(args.model);
  mpe::MpeModel model;
  model.store = std::move(saved.store);
  model.mask = saved.mask;
  model.vocab = std::move(saved.vocab);
  model.full_vocab = args.full_vocab;
  mpe::CandidateIndex candidates;
  {
    auto in = open_input(args.model + ".transitions.tsv");
    mpe::rebuild_candidates(mpe::read_transitions_tsv(in), model.vocab,
                            &candidates, &model.next_counts);
  }

  mpe::TimeSlotting slotting;
  slotting.slot_minutes = args.slot_minutes;
  parse_window(args.window, slotting);
  slotting.validate();

  std::vector<mpe::Record> records;
  {
    auto in = open_input(args.input);
    records = mpe::parse_triple_csv(in);
  }
  std::vector<mpe::Query> queries;
  queries.reserve(records.size());
  for (const auto& r : records) {
    auto slot = mpe::discretize_time(r.timestamp, slotting, args.tz_offset);
    queries.push_back({r.object, slot ? std::to_string(*slot) : "-1", r.location});
  }
  std::vector<mpe::RankedPrediction> predictions =
      mpe::predict_batch(model, candidates, queries, args.k);

  {
    auto out = open_output(args.out);
    out << "query\trank\tnext\tscore\tbackoff\n";
    for (size_t i = 0; i < predictions.size(); ++i)
      for (size_t rank = 0; rank < predictions[i].items.size(); ++rank)
        out << (i + 1) << '\t' << (rank + 1) << '\t'
            << predictions[i].items[rank].token << '\t'
            << fmt_g17(predictions[i].items[rank].score) << '\t'
            << mpe::backoff_name(predictions[i].backoff) << '\n';
  }
  write_config_sidecar(args.out, json{{"command", "predict"},
                                      {"model", args.model},
                                      {"input", args.input},
                                      {"slot_minutes", args.slot_minutes},
                                      {"window", args.window},
                                      {"tz_offset_minutes", args.tz_offset},
                                      {"k", args.k},
                                      {"full_vocab", args.full_vocab},
                                      {"out", args.out}});
  std::cout << "wrote predictions for " << queries.size() << " queries to "
            << args.out << '\n';
}

// ---------------------------------------------------- export-embeddings ----

struct ExportArgs {
  std::string model;
  std::string kind = "all";
  std::string out;
};

void run_export(const ExportArgs& args) {
  mpe::SavedModel saved = mpe::read_model_file(args.model);
  std::optional<mpe::EmbeddingKind> only;
  if (args.kind != "all") {
    only = mpe::parse_embedding_kind(args.kind);
    if (!only)
      throw mpe::DataError("--kind must be object, time, loc_current, loc_next or all");
  }
  {
    auto out = open_output(args.out);
    mpe::write_embeddings_tsv(out, saved.store, saved.vocab, only);
  }
  write_config_sidecar(args.out, json{{"command", "export-embeddings"},
                                      {"model", args.model},
                                      {"kind", args.kind},
                                      {"out", args.out}});
  std::cout << "embeddings written to " << args.out << '\n';
}

void add_hyperparam_flags(CLI::App* cmd, mpe::Hyperparams& hp) {
  cmd->add_option("--dim", hp.dim, "embedding dimensionality")->capture_default_str();
  cmd->add_option("--negatives", hp.negatives, "negative samples per quadruple")
      ->capture_default_str();
  cmd->add_option("--lr", hp.lr, "learning rate")->capture_default_str();
  cmd->add_option("--reg", hp.reg, "regularization strength")->capture_default_str();
  cmd->add_option("--epochs", hp.epochs, "training iterations")->capture_default_str();
  cmd->add_option("--early-stop-tol", hp.early_stop_rel_tol,
                  "relative objective tolerance for early stop (0 disables)")
      ->capture_default_str();
  cmd->add_option("--seed", hp.seed, "base RNG seed")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mobility pattern embeddings: ingest, train, evaluate, predict"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic trajectories");
  synth_cmd->add_option("--n-locations", synth.config.n_locations)->capture_default_str();
  synth_cmd->add_option("--out-degree", synth.config.out_degree)->capture_default_str();
  synth_cmd->add_option("--n-objects", synth.config.n_objects)->capture_default_str();
  synth_cmd->add_option("--n-slots", synth.config.n_slots)->capture_default_str();
  synth_cmd->add_option("--records", synth.config.records_per_object)->capture_default_str();
  synth_cmd->add_option("--object-signal", synth.config.object_signal)->capture_default_str();
  synth_cmd->add_option("--time-signal", synth.config.time_signal)->capture_default_str();
  synth_cmd->add_option("--seed", synth.config.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "output triple-csv path")->required();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "records -> training quadruples");
  ingest_cmd->add_option("--input", ingest.input)->required();
  ingest_cmd->add_option("--format", ingest.format, "triple or gps")->capture_default_str();
  ingest_cmd->add_option("--slot-minutes", ingest.slot_minutes,
                         "time slot width (default 30, or 15 for gps)");
  ingest_cmd->add_option("--window", ingest.window, "minutes-of-day START:END")
      ->capture_default_str();
  ingest_cmd->add_option("--grid", ingest.grid, "minlat:maxlat:minlon:maxlon:cellsize");
  ingest_cmd->add_option("--max-gap", ingest.max_gap,
                         "max seconds between consecutive records (default: unlimited, or 300 for gps)");
  ingest_cmd->add_option("--threshold", ingest.threshold,
                         "minimum transition occurrence count")->capture_default_str();
  ingest_cmd->add_option("--tz-offset", ingest.tz_offset, "minutes added to timestamps")
      ->capture_default_str();
  ingest_cmd->add_flag("--drop-self-loops", ingest.drop_self_loops);
  ingest_cmd->add_option("--out", ingest.out, "output quadruple-csv path")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit embeddings on a quadruple file");
  train_cmd->add_option("--input", train.input, "quadruple csv")->required();
  train_cmd->add_option("--split", train.split, "train:validation:test ratios")
      ->capture_default_str();
  add_hyperparam_flags(train_cmd, train.hp);
  train_cmd->add_option("--mask", train.mask, "full, object, time or plain")
      ->capture_default_str();
  train_cmd->add_option("--negative-mode", train.negative_mode, "context or true-only")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "model file path")->required();

  EvaluateArgs evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "multi-run model comparison");
  eval_cmd->add_option("--input", evaluate.input, "quadruple csv")->required();
  eval_cmd->add_option("--split", evaluate.split)->capture_default_str();
  add_hyperparam_flags(eval_cmd, evaluate.hp);
  eval_cmd->add_option("--models", evaluate.models,
                       "comma list of mpe, mpe-object, mpe-time, mpe-plain, mm, bayes")
      ->capture_default_str();
  eval_cmd->add_option("--runs", evaluate.runs, "training runs per embedding model")
      ->capture_default_str();
  eval_cmd->add_option("--k", evaluate.ks, "comma list of cutoffs")->capture_default_str();
  eval_cmd->add_option("--alpha", evaluate.alpha, "baseline smoothing")->capture_default_str();
  eval_cmd->add_flag("--full-vocab", evaluate.full_vocab,
                     "rank the whole next vocabulary instead of candidates");
  eval_cmd->add_option("--negative-mode", evaluate.negative_mode)->capture_default_str();
  eval_cmd->add_option("--out", evaluate.out, "report tsv path")->required();

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "top-k next locations for queries");
  predict_cmd->add_option("--model", predict.model)->required();
  predict_cmd->add_option("--input", predict.input, "triple csv of queries")->required();
  predict_cmd->add_option("--slot-minutes", predict.slot_minutes)->capture_default_str();
  predict_cmd->add_option("--window", predict.window)->capture_default_str();
  predict_cmd->add_option("--tz-offset", predict.tz_offset)->capture_default_str();
  predict_cmd->add_option("--k", predict.k)->capture_default_str();
  predict_cmd->add_flag("--full-vocab", predict.full_vocab);
  predict_cmd->add_option("--out", predict.out, "predictions tsv path")->required();

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export-embeddings", "model file -> TSV");
  export_cmd->add_option("--model", exp.model)->required();
  export_cmd->add_option("--kind", exp.kind, "object, time, loc_current, loc_next or all")
      ->capture_default_str();
  export_cmd->add_option("--out", exp.out, "tsv path")->required();

  try {
    app.parse(argc, argv);
    if (synth_cmd->parsed()) run_synth(synth);
    if (ingest_cmd->parsed()) run_ingest(ingest);
    if (train_cmd->parsed()) run_train(train);
    if (eval_cmd->parsed()) run_evaluate(evaluate);
    if (predict_cmd->parsed()) run_predict(predict);
    if (export_cmd->parsed()) run_export(exp);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const mpe::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const mpe::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
