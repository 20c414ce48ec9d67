// ukta — command-line front end: analyze, score, train, eval, serve,
// generate, registry, ablation.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ukta/bundle.hpp"
#include "ukta/dataset.hpp"
#include "ukta/embeddings.hpp"
#include "ukta/evaluation.hpp"
#include "ukta/http.hpp"
#include "ukta/registry.hpp"
#include "ukta/remote_embeddings.hpp"
#include "ukta/scorer.hpp"
#include "ukta/service.hpp"
#include "ukta/tagger.hpp"

namespace fs = std::filesystem;
using namespace ukta;

namespace {

// Exit codes: 0 success, 1 internal, 2 usage, 3 tagger, 4 parse, 5 I/O,
// 6 model/registry, 7 training, 8 embedding provider, 9 analysis.
int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Unreachable:
    case ErrorCode::Timeout:
    case ErrorCode::InvalidResponse: return 3;
    case ErrorCode::UnknownTag:
    case ErrorCode::EmptySentence:
    case ErrorCode::MalformedRecord: return 4;
    case ErrorCode::Io: return 5;
    case ErrorCode::RegistryMismatch:
    case ErrorCode::NoLabels:
    case ErrorCode::ShapeMismatch: return 6;
    case ErrorCode::DivergedLoss:
    case ErrorCode::InsufficientData: return 7;
    case ErrorCode::ProviderUnavailable: return 8;
    default: return 9;
  }
}

struct Common {
  std::string registry_path;
  std::size_t embed_dim = 64;
  std::string tagger;
  int tagger_timeout_ms = 10000;
  int tagger_retries = 2;
};

struct InputOpts {
  std::string text, file, pretagged, bundle, format;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--registry", c.registry_path, "Feature registry JSON (default: built-in)");
  app->add_option("--embed-dim", c.embed_dim, "Built-in embedding dimension")->check(CLI::Range(8, 4096));
}

void add_tagger(CLI::App* app, Common& c) {
  app->add_option("--tagger", c.tagger, "Tagger endpoint URL (env UKTA_TAGGER_ENDPOINT overrides)");
  app->add_option("--tagger-timeout", c.tagger_timeout_ms, "Tagger timeout in ms")->check(CLI::PositiveNumber);
  app->add_option("--tagger-retries", c.tagger_retries, "Tagger retries")->check(CLI::NonNegativeNumber);
}

void add_input(CLI::App* app, InputOpts& in, bool allow_bundle) {
  auto* g = app->add_option_group("input", "Exactly one essay source");
  g->add_option("--text", in.text, "Raw essay text (sent to the tagger)");
  g->add_option("--file", in.file, "File with raw essay text (sent to the tagger)");
  g->add_option("--pretagged", in.pretagged, "Pre-tagged essay (.tsv or .json)");
  if (allow_bundle) g->add_option("--bundle", in.bundle, "Analysis bundle JSON to re-ingest");
  g->require_option(1);
  app->add_option("--format", in.format, "Pre-tagged format (default: by extension)")
      ->check(CLI::IsMember({"tsv", "json"}));
}

FeatureRegistry load_registry(const Common& c) {
  if (c.registry_path.empty()) return default_registry();
  try {
    return registry_from_json(nlohmann::ordered_json::parse(read_text_file(c.registry_path)));
  } catch (const nlohmann::json::parse_error& ex) {
    throw Error(ErrorCode::MalformedRecord, ex.what(), c.registry_path);
  }
}

std::shared_ptr<const EmbeddingProvider> make_provider(const Common& c, const LoadedModel* model) {
  std::size_t dim = c.embed_dim;
  if (model) dim = model->model.config.embed_dim;
  if (const char* url = std::getenv("UKTA_EMBED_ENDPOINT"); url && *url)
    return std::make_shared<RemoteEmbedding>(url, dim);
  return std::make_shared<HashEmbedding>(dim);
}

TaggerConfig tagger_config(const Common& c) {
  TaggerConfig t;
  t.endpoint = c.tagger;
  t.timeout_ms = c.tagger_timeout_ms;
  t.retries = c.tagger_retries;
  return apply_tagger_env(t);
}

Essay read_input(const InputOpts& in, const Common& c) {
  if (!in.pretagged.empty()) {
    const auto fmt = in.format.empty() ? format_for_path(in.pretagged)
                                       : (in.format == "json" ? TextFormat::Json : TextFormat::Tsv);
    return parse_pretagged(read_text_file(in.pretagged), fmt);
  }
  if (!in.bundle.empty()) return essay_from_bundle(read_text_file(in.bundle));
  const std::string raw = in.text.empty() ? read_text_file(in.file) : in.text;
  return tag_text(raw, tagger_config(c));
}

void write_exports(const AnalysisBundle& b, const std::string& dir) {
  fs::create_directories(dir);
  for (auto f : {ExportFormat::Json, ExportFormat::Csv, ExportFormat::Txt})
    write_text_file((fs::path(dir) / export_file_name(f)).string(), export_bundle(b, f));
}

std::string score_table(const AnalysisBundle& b) {
  std::string out;
  char buf[256];
  out += "Rubric scores\n";
  for (std::size_t k = 0; k < kRubricCount; ++k) {
    std::snprintf(buf, sizeof buf, "  %-27s %d  (%.3f)\n", std::string(kRubricNames[k]).c_str(),
                  b.rubric->scores[k], b.rubric->raw[k]);
    out += buf;
  }
  out += "Top features\n";
  for (std::size_t i = 0; i < b.rubric->top_features.size(); ++i) {
    const auto& t = b.rubric->top_features[i];
    std::snprintf(buf, sizeof buf, "  %2zu. %-24s %-9s weight %.6f  value %s\n", i + 1, t.name.c_str(),
                  std::string(to_string(t.family)).c_str(), t.weight,
                  t.available ? format_double(t.value).c_str() : "n/a");
    out += buf;
  }
  return out;
}

std::vector<Sample> samples_for(const std::vector<Essay>& essays, const FeatureRegistry& registry,
                                const EmbeddingProvider& provider) {
  std::vector<Sample> out;
  out.reserve(essays.size());
  for (const auto& e : essays) {
    try {
      out.push_back(make_sample(e, registry, provider));
    } catch (const Error& ex) {
      throw Error(ex.code(), ex.what(), e.id + (ex.location().empty() ? "" : ": " + ex.location()));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ukta — Korean essay analysis and rubric scoring"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common common;
  InputOpts input;

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Analyze one essay and write bundle.json, features.csv, summary.txt");
  std::string out_dir, model_path;
  add_input(analyze_cmd, input, false);
  add_common(analyze_cmd, common);
  add_tagger(analyze_cmd, common);
  analyze_cmd->add_option("--out", out_dir, "Output directory")->required();
  analyze_cmd->add_option("--model", model_path, "Optional checkpoint; adds rubric scores");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score one essay with a trained model");
  add_input(score_cmd, input, true);
  add_common(score_cmd, common);
  add_tagger(score_cmd, common);
  score_cmd->add_option("--model", model_path, "Model checkpoint")->required();
  score_cmd->add_option("--out", out_dir, "Also write bundle.json, features.csv, summary.txt here");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a scorer on a labelled dataset");
  std::string data_path, log_path;
  std::uint64_t seed = 42;
  double val_frac = 0.15;
  bool baseline = false;
  std::string attention = "conditioned";
  ScorerConfig scfg;
  add_common(train_cmd, common);
  train_cmd->add_option("--data", data_path, "Dataset directory or .jsonl file")->required();
  train_cmd->add_option("--model", model_path, "Checkpoint output path")->required();
  train_cmd->add_option("--log", log_path, "Training log output (default: <model>.log.txt)");
  train_cmd->add_option("--seed", seed, "Seed for init, shuffling and dropout");
  train_cmd->add_option("--val-frac", val_frac, "Validation fraction (topic-stratified)")->check(CLI::Range(0.0, 0.9));
  train_cmd->add_option("--epochs", scfg.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", scfg.patience, "Early-stopping patience, 0 = off");
  train_cmd->add_option("--lr", scfg.lr)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", scfg.dropout)->check(CLI::Range(0.0, 0.99));
  train_cmd->add_option("--batch-size", scfg.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", scfg.hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--essay-dim", scfg.essay_dim)->check(CLI::PositiveNumber);
  train_cmd->add_flag("--baseline", baseline, "Sentence-only model (no feature branch)");
  train_cmd->add_option("--attention", attention, "Attention logits")->check(CLI::IsMember({"conditioned", "global"}));

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model (or a predictions file) on a labelled dataset");
  std::string predictions_path, report_prefix;
  add_common(eval_cmd, common);
  eval_cmd->add_option("--data", data_path, "Dataset directory or .jsonl file")->required();
  auto* eval_model = eval_cmd->add_option("--model", model_path, "Model checkpoint");
  auto* eval_preds = eval_cmd->add_option("--predictions", predictions_path, "JSON-lines predictions");
  eval_model->excludes(eval_preds);
  eval_cmd->add_option("--out", report_prefix, "Write <prefix>.json and <prefix>.txt");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  std::string host = "127.0.0.1";
  int port = 8080;
  if (const char* p = std::getenv("UKTA_PORT"); p && *p) port = std::atoi(p);
  add_common(serve_cmd, common);
  add_tagger(serve_cmd, common);
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port, "Port (env UKTA_PORT)")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--model", model_path, "Optional checkpoint for /api/score");

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic labelled corpus");
  SyntheticConfig gcfg;
  gen_cmd->add_option("--out", out_dir, "Output directory")->required();
  gen_cmd->add_option("--essays", gcfg.essays)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--topics", gcfg.topics)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--noise", gcfg.label_noise, "Label noise rate")->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", seed);

  // registry
  auto* reg_cmd = app.add_subcommand("registry", "Print the feature registry JSON");
  std::string reg_out;
  add_common(reg_cmd, common);
  reg_cmd->add_option("--out", reg_out, "Write to a file instead of stdout");

  // ablation
  auto* abl_cmd = app.add_subcommand("ablation", "Baseline vs full model on synthetic corpora");
  AblationConfig acfg;
  add_common(abl_cmd, common);
  abl_cmd->add_option("--essays", acfg.essays)->check(CLI::PositiveNumber);
  abl_cmd->add_option("--seeds", acfg.seeds)->delimiter(',');
  abl_cmd->add_option("--epochs", acfg.scorer.epochs)->check(CLI::PositiveNumber);
  abl_cmd->add_option("--out", report_prefix, "Write <prefix>.json and <prefix>.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "ukta: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*analyze_cmd || *score_cmd) {
      const auto registry = load_registry(common);
      std::optional<LoadedModel> model;
      if (!model_path.empty()) model = load_model_file(model_path);
      const auto provider = make_provider(common, model ? &*model : nullptr);
      const Essay essay = read_input(input, common);
      const auto bundle = make_bundle(essay, registry, *provider, model ? &*model : nullptr);
      if (!out_dir.empty()) write_exports(bundle, out_dir);
      if (*score_cmd) {
        std::cout << score_table(bundle);
        if (!out_dir.empty()) {
          const auto j = bundle_to_json(bundle);
          write_text_file((fs::path(out_dir) / "rubric.json").string(), j["rubric"].dump(2) + "\n");
        }
      } else {
        std::cout << "wrote " << out_dir << "/{bundle.json,features.csv,summary.txt} (id " << bundle.id << ")\n";
      }
      return 0;
    }

    if (*train_cmd) {
      const auto registry = load_registry(common);
      const auto provider = make_provider(common, nullptr);
      const auto essays = load_dataset(data_path);
      const auto samples = samples_for(essays, registry, *provider);
      std::vector<std::string> topics;
      for (const auto& s : samples) topics.push_back(s.topic);
      const auto split = stratified_split(topics, 1.0 - val_frac, val_frac, seed);
      const std::span<const Sample> all(samples);
      const auto train = pick(all, split.train);
      const auto val = pick(all, split.val);
      scfg.essay_branch = !baseline;
      scfg.attention = attention == "global" ? AttentionMode::GlobalBias : AttentionMode::Conditioned;
      const auto model = fit_model(train, val, registry, *provider, scfg, seed);
      write_text_file(model_path, model_to_text(model));
      std::string log = "epoch\ttrain_loss\tval_loss\n";
      for (std::size_t e = 0; e < model.log.train_loss.size(); ++e)
        log += std::to_string(e + 1) + "\t" + format_double(model.log.train_loss[e]) + "\t" +
               (e < model.log.val_loss.size() ? format_double(model.log.val_loss[e]) : "") + "\n";
      log += "# best_epoch " + std::to_string(model.log.best_epoch) +
             (model.log.early_stopped ? " (early stopped)" : "") + "\n";
      write_text_file(log_path.empty() ? model_path + ".log.txt" : log_path, log);
      std::cout << "trained on " << train.size() << " essays (" << val.size() << " validation); best epoch "
                << model.log.best_epoch << "; wrote " << model_path << "\n";
      return 0;
    }

    if (*eval_cmd) {
      if (model_path.empty() == predictions_path.empty()) {
        std::cerr << "ukta: usage: eval needs exactly one of --model, --predictions\n";
        return 2;
      }
      const auto essays = load_dataset(data_path);
      std::vector<RubricScores> gold, pred;
      std::string name;
      if (!model_path.empty()) {
        const auto registry = load_registry(common);
        const auto model = load_model_file(model_path);
        const auto provider = make_provider(common, &model);
        const auto samples = samples_for(essays, registry, *provider);
        for (const auto& s : samples) {
          if (!s.labels) throw Error(ErrorCode::NoLabels, "essay has no labels", s.id);
          gold.push_back(*s.labels);
        }
        pred = predict_scores(model.model, samples, registry);
        name = model.model.config.essay_branch ? "full" : "baseline";
      } else {
        std::map<std::string, RubricScores> by_id;
        for (const auto& p : load_predictions(predictions_path)) by_id[p.id] = p.scores;
        for (const auto& e : essays) {
          if (!e.labels) throw Error(ErrorCode::NoLabels, "essay has no labels", e.id);
          const auto it = by_id.find(e.id);
          if (it == by_id.end()) throw Error(ErrorCode::LengthMismatch, "no prediction for essay", e.id);
          gold.push_back(*e.labels);
          pred.push_back(it->second);
        }
        name = "predictions";
      }
      const auto report = evaluate_predictions(pred, gold, name);
      const auto text = report_to_text(report);
      std::cout << text;
      if (!report_prefix.empty()) {
        write_text_file(report_prefix + ".json", report_to_json(report).dump(2) + "\n");
        write_text_file(report_prefix + ".txt", text);
      }
      return 0;
    }

    if (*serve_cmd) {
      ServiceConfig cfg;
      cfg.registry = load_registry(common);
      if (!model_path.empty()) cfg.model = load_model_file(model_path);
      cfg.provider = make_provider(common, cfg.model ? &*cfg.model : nullptr);
      auto t = tagger_config(common);
      if (!t.endpoint.empty()) cfg.tagger = t;
      Service service(std::move(cfg));
      httplib::Server server;
      service.mount(server);
      server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        std::cerr << req.method << " " << req.path << " " << res.status << "\n";
      });
      if (!server.bind_to_port(host, port)) {
        std::cerr << "ukta: cannot listen on " << host << ":" << port << "\n";
        return 5;
      }
      std::cerr << "ukta serve: listening on http://" << host << ":" << port
                << (service.has_model() ? " (model loaded)" : " (no model)") << "\n";
      server.listen_after_bind();
      return 0;
    }

    if (*gen_cmd) {
      std::vector<Essay> essays;
      for (auto& s : generate_synthetic(gcfg, seed)) essays.push_back(std::move(s.essay));
      write_dataset(out_dir, essays);
      std::cout << "wrote " << essays.size() << " essays to " << out_dir << "\n";
      return 0;
    }

    if (*reg_cmd) {
      const auto text = registry_to_json(load_registry(common)).dump(2) + "\n";
      if (reg_out.empty())
        std::cout << text;
      else
        write_text_file(reg_out, text);
      return 0;
    }

    if (*abl_cmd) {
      const auto registry = load_registry(common);
      const auto provider = make_provider(common, nullptr);
      const auto runs = run_ablation(acfg, registry, *provider, [](const std::string& m) { std::cerr << m << "\n"; });
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      std::string text;
      for (const auto& r : runs) {
        const std::vector<EvaluationReport> both = {r.baseline, r.full};
        text += "seed " + std::to_string(r.seed) + "\n" + reports_to_text(both) + "\n";
        j.push_back({{"seed", r.seed}, {"baseline", report_to_json(r.baseline)}, {"full", report_to_json(r.full)}});
      }
      std::cout << text;
      if (!report_prefix.empty()) {
        write_text_file(report_prefix + ".json", j.dump(2) + "\n");
        write_text_file(report_prefix + ".txt", text);
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "ukta: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "ukta: internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
