// Copyright 2026 The Dialret Authors.
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

// dialret: command-line entry point for corpus generation, indexing,
// training, IGS target construction, dialog simulation and the live session
// service.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 runtime
// failure. Failures print one line to stderr:
//   dialret: error[<kind>]: <message>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dialret/corpus.h"
#include "dialret/dialog.h"
#include "dialret/encoder.h"
#include "dialret/error.h"
#include "dialret/eval.h"
#include "dialret/http_server.h"
#include "dialret/igs.h"
#include "dialret/retrieval.h"
#include "dialret/session_service.h"
#include "dialret/text.h"
#include "dialret/training.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

int LogLevel() {
  const char* env = std::getenv("DIALRET_LOG");
  if (!env) return 0;
  const std::string v = env;
  if (v == "debug") return 2;
  if (v == "info" || v == "1") return 1;
  return 0;
}

void Log(int level, const std::string& message) {
  if (LogLevel() >= level) std::cerr << "dialret: " << message << '\n';
}

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void WriteText(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dialret::RuntimeFailure("cannot write " + path.string());
  out << contents;
  if (!out) throw dialret::RuntimeFailure("write failed for " + path.string());
}

// Resolved configuration written next to every output.
void EmitConfig(const fs::path& output, const ordered_json& config) {
  WriteText(fs::path(output.string() + ".config.json"), config.dump(2) + "\n");
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw dialret::DataError("cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw dialret::DataError("malformed JSON in " + path.string());
  return j;
}

// --encoder accepts inline JSON, a spec file, or a fitted encoder file.
dialret::Encoder ResolveEncoder(const std::string& arg,
                                const dialret::Corpus& corpus) {
  json j;
  if (!arg.empty() && dialret::Trim(arg).front() == '{') {
    j = json::parse(arg, nullptr, false);
    if (j.is_discarded()) throw dialret::DataError("malformed --encoder JSON");
  } else {
    j = ReadJsonFile(arg);
  }
  if (j.contains("spec") && j.contains("state")) {
    return dialret::Encoder::FromJson(j);
  }
  return dialret::FitEncoder(corpus, dialret::EncoderSpec::FromJson(j));
}

// "random:3" sets the seed, "candidate_aware:4" sets k.
dialret::Policy ParsePolicyArg(const std::string& text, std::uint64_t seed,
                               std::size_t k) {
  dialret::Policy p;
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  p.kind = dialret::ParsePolicyKind(name);
  std::optional<std::uint64_t> param;
  if (colon != std::string::npos) {
    try {
      param = std::stoull(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw dialret::DataError("bad policy parameter in '" + text + "'");
    }
  }
  if (p.kind == dialret::PolicyKind::kRandom) p.seed = param.value_or(seed);
  if (p.kind == dialret::PolicyKind::kCandidateAware) {
    p.k = static_cast<std::size_t>(param.value_or(k));
  }
  dialret::ValidatePolicy(p);
  return p;
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!dialret::Trim(item).empty()) out.emplace_back(dialret::Trim(item));
  }
  return out;
}

struct CommonArgs {
  std::string corpus;
  std::string encoder = R"({"kind":"tfidf"})";
  std::size_t jobs = 1;
};

void AddCorpusEncoder(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--corpus", args.corpus, "Corpus JSONL file")->required();
  cmd->add_option("--encoder", args.encoder,
                  "Encoder: inline JSON spec, spec file, or fitted encoder file")
      ->capture_default_str();
}

dialret::ReportFormat FormatFor(const std::string& format, const fs::path& out) {
  if (format == "csv") return dialret::ReportFormat::kCsv;
  if (format == "json") return dialret::ReportFormat::kJson;
  return out.extension() == ".csv" ? dialret::ReportFormat::kCsv
                                   : dialret::ReportFormat::kJson;
}

dialret::HttpServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server) g_server->Stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialog-driven retrieval engine and simulation harness"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI config file; flags override it");

  // synth
  dialret::SyntheticConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--n", synth.n_videos, "Number of records")->capture_default_str();
  synth_cmd->add_option("--m", synth.m_qa, "QA pairs per record")->capture_default_str();
  synth_cmd->add_option("--vocab", synth.vocab_size, "Vocabulary size")->capture_default_str();
  synth_cmd->add_option("--disc", synth.discriminative_tokens_per_answer,
                        "Record-unique tokens per answer")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("-o,--output", synth_out, "Output JSONL path")->required();

  // validate
  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Validate a corpus file");
  validate_cmd->add_option("corpus", validate_path, "Corpus JSONL file")->required();

  // index
  CommonArgs index_args;
  std::string index_out, index_encoder_out;
  auto* index_cmd = app.add_subcommand("index", "Build and save an item index");
  AddCorpusEncoder(index_cmd, index_args);
  index_cmd->add_option("-o,--output", index_out, "Index file")->required();
  index_cmd->add_option("--encoder-out", index_encoder_out,
                        "Also save the fitted encoder here");

  // train
  CommonArgs train_args;
  dialret::TrainConfig train;
  std::string train_out;
  auto* train_cmd = app.add_subcommand(
      "train", "Train a linear projection over a frozen base encoder");
  AddCorpusEncoder(train_cmd, train_args);
  train_cmd->add_option("--epochs", train.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size, "Batch size")->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate, "Learning rate")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Shuffle seed")->capture_default_str();
  train_cmd->add_option("--dim", train.dim, "Projection dim (0 = base dim)")->capture_default_str();
  train_cmd->add_option("--tau", train.tau, "Retrieval temperature")->capture_default_str();
  train_cmd->add_option("-o,--output", train_out, "Fitted encoder output")->required();

  // query
  CommonArgs query_args;
  std::string query_text, query_index;
  std::size_t query_top = 10;
  auto* query_cmd = app.add_subcommand("query", "Rank the corpus for a text query");
  AddCorpusEncoder(query_cmd, query_args);
  query_cmd->add_option("--text", query_text, "Query context text")->required();
  query_cmd->add_option("--index", query_index, "Prebuilt index file");
  query_cmd->add_option("--top", query_top, "Results to print")->capture_default_str();

  // igs-build
  CommonArgs igs_args;
  dialret::IgsConfig igs;
  std::string igs_out;
  auto* igs_cmd = app.add_subcommand("igs-build", "Build IGS question targets");
  AddCorpusEncoder(igs_cmd, igs_args);
  igs_cmd->add_option("--rounds", igs.rounds, "Dialog rounds M")->capture_default_str();
  igs_cmd->add_option("--k", igs.k, "Top-k summaries in each context")->capture_default_str();
  igs_cmd->add_flag("--strict", igs.strict, "Fail on records with too few QA pairs");
  igs_cmd->add_option("--jobs", igs.jobs, "Worker threads")->capture_default_str();
  igs_cmd->add_option("-o,--output", igs_out, "Output JSONL")->required();

  // simulate
  CommonArgs sim_args;
  std::string sim_policy = "igs_oracle", sim_out, sim_format, sim_trace, sim_curve;
  std::uint64_t sim_seed = 0;
  std::size_t sim_k = dialret::kDefaultTopK, sim_rounds = dialret::kDefaultIgsRounds;
  auto* sim_cmd = app.add_subcommand("simulate", "Run simulated dialogs for every record");
  AddCorpusEncoder(sim_cmd, sim_args);
  sim_cmd->add_option("--policy", sim_policy,
                      "igs_oracle | original_order | random[:seed] | candidate_aware[:k]")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_seed, "Seed for the random policy")->capture_default_str();
  sim_cmd->add_option("--policy-k", sim_k, "k for candidate_aware")->capture_default_str();
  sim_cmd->add_option("--rounds", sim_rounds, "Dialog rounds M")->capture_default_str();
  sim_cmd->add_option("--jobs", sim_args.jobs, "Worker threads")->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_out, "Report file (.csv or .json)")->required();
  sim_cmd->add_option("--format", sim_format, "csv | json (default: from extension)");
  sim_cmd->add_option("--trace", sim_trace, "Write per-session traces (JSON)");
  sim_cmd->add_option("--curve", sim_curve, "Write the per-round curve (JSON)");

  // compare
  CommonArgs cmp_args;
  std::string cmp_policies = "igs_oracle,original_order,random:0", cmp_out;
  std::uint64_t cmp_seed = 0;
  std::size_t cmp_k = dialret::kDefaultTopK, cmp_rounds = dialret::kDefaultIgsRounds;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare policies round by round");
  AddCorpusEncoder(cmp_cmd, cmp_args);
  cmp_cmd->add_option("--policies", cmp_policies, "Comma-separated policies")
      ->capture_default_str();
  cmp_cmd->add_option("--seed", cmp_seed, "Seed for random policies without one")
      ->capture_default_str();
  cmp_cmd->add_option("--policy-k", cmp_k, "k for candidate_aware without one")
      ->capture_default_str();
  cmp_cmd->add_option("--rounds", cmp_rounds, "Dialog rounds M")->capture_default_str();
  cmp_cmd->add_option("--jobs", cmp_args.jobs, "Worker threads")->capture_default_str();
  cmp_cmd->add_option("-o,--output", cmp_out, "Comparison JSON")->required();

  // serve
  CommonArgs serve_args;
  std::string serve_host = "127.0.0.1", serve_data = "sessions", serve_webui;
  int serve_port = 8080;
  std::size_t serve_subset = 0, serve_k = dialret::kDefaultTopK;
  std::uint64_t serve_seed = 0;
  bool serve_debug = false;
  auto* serve_cmd = app.add_subcommand("serve", "Start the live session HTTP service");
  AddCorpusEncoder(serve_cmd, serve_args);
  serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve_port, "Port (0 = any)")->capture_default_str();
  serve_cmd->add_option("--data-dir", serve_data, "Session log directory")->capture_default_str();
  serve_cmd->add_option("--subset", serve_subset, "Restrict to a random n-record subset")
      ->capture_default_str();
  serve_cmd->add_option("--seed", serve_seed, "Subset seed")->capture_default_str();
  serve_cmd->add_option("--k", serve_k, "Default candidates shown per round")->capture_default_str();
  serve_cmd->add_flag("--debug", serve_debug, "Expose ground-truth ranks");
  serve_cmd->add_option("--webui-dir", serve_webui, "Static UI bundle served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "dialret: error[usage]: " << OneLine(e.what()) << '\n';
    return 1;
  }

  try {
    if (*synth_cmd) {
      const dialret::Corpus corpus = dialret::GenerateSynthetic(synth);
      dialret::SaveCorpus(corpus, synth_out);
      ordered_json cfg;
      cfg["command"] = "synth";
      cfg["n"] = synth.n_videos;
      cfg["m"] = synth.m_qa;
      cfg["vocab"] = synth.vocab_size;
      cfg["disc"] = synth.discriminative_tokens_per_answer;
      cfg["seed"] = synth.seed;
      cfg["output"] = synth_out;
      EmitConfig(synth_out, cfg);
      Log(1, "wrote " + std::to_string(corpus.size()) + " records to " + synth_out);
    } else if (*validate_cmd) {
      const dialret::Corpus corpus = dialret::LoadCorpus(validate_path);
      std::cout << "ok: " << corpus.size() << " records\n";
    } else if (*index_cmd) {
      const auto corpus = dialret::LoadCorpus(index_args.corpus);
      const auto encoder = ResolveEncoder(index_args.encoder, corpus);
      const auto index = dialret::BuildIndex(corpus, encoder);
      dialret::SaveIndex(index, index_out);
      if (!index_encoder_out.empty()) dialret::SaveEncoder(encoder, index_encoder_out);
      ordered_json cfg;
      cfg["command"] = "index";
      cfg["corpus"] = index_args.corpus;
      cfg["encoder"] = encoder.spec().ToJson();
      cfg["encoder_fingerprint"] = dialret::HexU64(encoder.fingerprint());
      cfg["output"] = index_out;
      EmitConfig(index_out, cfg);
    } else if (*train_cmd) {
      const auto corpus = dialret::LoadCorpus(train_args.corpus);
      json base_json = dialret::Trim(train_args.encoder).front() == '{'
                           ? json::parse(train_args.encoder, nullptr, false)
                           : ReadJsonFile(train_args.encoder);
      if (base_json.is_discarded()) throw dialret::DataError("malformed --encoder JSON");
      const auto base = dialret::EncoderSpec::FromJson(base_json);
      const auto result = dialret::TrainLinearProjection(corpus, base, train);
      dialret::SaveEncoder(result.encoder, train_out);
      ordered_json cfg;
      cfg["command"] = "train";
      cfg["corpus"] = train_args.corpus;
      cfg["base"] = base.ToJson();
      cfg["epochs"] = train.epochs;
      cfg["batch_size"] = train.batch_size;
      cfg["learning_rate"] = train.learning_rate;
      cfg["seed"] = train.seed;
      cfg["dim"] = train.dim;
      cfg["tau"] = train.tau;
      cfg["output"] = train_out;
      EmitConfig(train_out, cfg);
      ordered_json log;
      log["initial_loss"] = result.initial_loss;
      log["final_loss"] = result.final_loss;
      log["epoch_losses"] = result.epoch_losses;
      WriteText(train_out + ".log.json", log.dump(2) + "\n");
      for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
        Log(1, "epoch " + std::to_string(e + 1) + " loss " +
                   std::to_string(result.epoch_losses[e]));
      }
    } else if (*query_cmd) {
      const auto corpus = dialret::LoadCorpus(query_args.corpus);
      const auto encoder = ResolveEncoder(query_args.encoder, corpus);
      const auto index = query_index.empty() ? dialret::BuildIndex(corpus, encoder)
                                             : dialret::LoadIndex(query_index);
      const auto result = dialret::Retrieve(query_text, encoder, index);
      for (std::size_t pos : result.TopK(query_top)) {
        std::printf("%zu\t%s\t%.6f\n", result.rank[pos], index.ids()[pos].c_str(),
                    result.probabilities[pos]);
      }
    } else if (*igs_cmd) {
      const auto corpus = dialret::LoadCorpus(igs_args.corpus);
      const auto encoder = ResolveEncoder(igs_args.encoder, corpus);
      const auto index = dialret::BuildIndex(corpus, encoder);
      const auto dataset = dialret::BuildIgsDataset(corpus, encoder, index, igs);
      dialret::ExportIgs(dataset, igs_out);
      for (const auto& id : dataset.skipped) {
        std::cerr << "dialret: warning: skipped '" << id
                  << "' (too few QA pairs for " << igs.rounds << " rounds)\n";
      }
      ordered_json cfg;
      cfg["command"] = "igs-build";
      cfg["corpus"] = igs_args.corpus;
      cfg["encoder"] = encoder.spec().ToJson();
      cfg["encoder_fingerprint"] = dialret::HexU64(encoder.fingerprint());
      cfg["rounds"] = igs.rounds;
      cfg["k"] = igs.k;
      cfg["strict"] = igs.strict;
      cfg["output"] = igs_out;
      EmitConfig(igs_out, cfg);
    } else if (*sim_cmd) {
      const auto corpus = dialret::LoadCorpus(sim_args.corpus);
      const auto encoder = ResolveEncoder(sim_args.encoder, corpus);
      const auto index = dialret::BuildIndex(corpus, encoder);
      const auto policy = ParsePolicyArg(sim_policy, sim_seed, sim_k);
      const auto exp = dialret::RunExperiment(corpus, policy, sim_rounds, encoder,
                                              index, sim_args.jobs);
      ordered_json cfg;
      cfg["command"] = "simulate";
      cfg["corpus"] = sim_args.corpus;
      cfg["encoder"] = encoder.spec().ToJson();
      cfg["encoder_fingerprint"] = dialret::HexU64(encoder.fingerprint());
      cfg["policy"] = policy.ToJson();
      cfg["rounds"] = sim_rounds;
      cfg["records"] = exp.target_ids.size();
      cfg["skipped"] = exp.skipped;
      const auto report = dialret::PerRoundReport(exp, json::parse(cfg.dump()));
      dialret::ExportReport(report, sim_out, FormatFor(sim_format, sim_out));
      cfg["output"] = sim_out;
      EmitConfig(sim_out, cfg);
      if (!sim_curve.empty()) {
        WriteText(sim_curve, dialret::ReportCurveJson(report, policy.Name()).dump(2) + "\n");
      }
      if (!sim_trace.empty()) {
        ordered_json traces = ordered_json::array();
        for (const auto& id : exp.target_ids) {
          const auto session =
              dialret::RunSession(corpus, id, policy, sim_rounds, encoder, index);
          traces.push_back(dialret::SessionTraceJson(session, index));
        }
        WriteText(sim_trace, traces.dump(2) + "\n");
      }
      std::cout << dialret::FormatReportTable(report);
    } else if (*cmp_cmd) {
      const auto corpus = dialret::LoadCorpus(cmp_args.corpus);
      const auto encoder = ResolveEncoder(cmp_args.encoder, corpus);
      const auto index = dialret::BuildIndex(corpus, encoder);
      std::vector<dialret::Policy> policies;
      for (const auto& p : SplitComma(cmp_policies)) {
        policies.push_back(ParsePolicyArg(p, cmp_seed, cmp_k));
      }
      if (policies.empty()) throw dialret::DataError("no policies given");
      const auto cmp = dialret::ComparePolicies(corpus, policies, cmp_rounds,
                                                encoder, index, cmp_args.jobs);
      ordered_json out;
      out["rounds"] = cmp_rounds;
      ordered_json reports = ordered_json::array();
      for (std::size_t i = 0; i < cmp.policies.size(); ++i) {
        ordered_json entry;
        entry["policy"] = cmp.policies[i];
        entry["report"] = dialret::ReportToJson(cmp.reports[i]);
        entry["curve"] = dialret::ReportCurveJson(cmp.reports[i], cmp.policies[i]);
        reports.push_back(std::move(entry));
        std::cout << "== " << cmp.policies[i] << '\n'
                  << dialret::FormatReportTable(cmp.reports[i]);
      }
      out["reports"] = std::move(reports);
      WriteText(cmp_out, out.dump(2) + "\n");
      ordered_json cfg;
      cfg["command"] = "compare";
      cfg["corpus"] = cmp_args.corpus;
      cfg["encoder"] = encoder.spec().ToJson();
      cfg["encoder_fingerprint"] = dialret::HexU64(encoder.fingerprint());
      ordered_json names = ordered_json::array();
      for (const auto& p : policies) names.push_back(ordered_json::parse(p.ToJson().dump()));
      cfg["policies"] = std::move(names);
      cfg["rounds"] = cmp_rounds;
      cfg["output"] = cmp_out;
      EmitConfig(cmp_out, cfg);
    } else if (*serve_cmd) {
      auto corpus = dialret::LoadCorpus(serve_args.corpus);
      if (serve_subset > 0) corpus = dialret::SampleSubset(corpus, serve_subset, serve_seed);
      auto encoder = ResolveEncoder(serve_args.encoder, corpus);
      dialret::ServiceOptions options;
      options.corpus_name = fs::path(serve_args.corpus).stem().string();
      options.data_dir = serve_data;
      options.debug = serve_debug;
      options.default_k = serve_k;
      ordered_json cfg;
      cfg["command"] = "serve";
      cfg["corpus"] = serve_args.corpus;
      cfg["corpus_ref"] = options.corpus_name;
      cfg["records"] = corpus.size();
      cfg["subset"] = serve_subset;
      cfg["seed"] = serve_seed;
      cfg["encoder"] = encoder.spec().ToJson();
      cfg["k"] = serve_k;
      cfg["debug"] = serve_debug;
      dialret::SessionService service(std::move(corpus), std::move(encoder), options);
      const std::size_t restored = service.RecoverFromLogs();
      EmitConfig(fs::path(serve_data) / "server", cfg);
      dialret::HttpServer server(service, serve_webui);
      const int port = server.Bind(serve_host, serve_port);
      g_server = &server;
      std::signal(SIGINT, HandleSignal);
      std::signal(SIGTERM, HandleSignal);
      std::cerr << "dialret: serving " << service.corpus().size()
                << " records on http://" << serve_host << ":" << port
                << " (restored " << restored << " sessions)\n";
      server.Listen();
      g_server = nullptr;
    }
  } catch (const dialret::DataError& e) {
    std::cerr << "dialret: error[data]: " << OneLine(e.what()) << '\n';
    return 2;
  } catch (const dialret::NotFoundError& e) {
    std::cerr << "dialret: error[data]: " << OneLine(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dialret: error[runtime]: " << OneLine(e.what()) << '\n';
    return 3;
  }
  return 0;
}
