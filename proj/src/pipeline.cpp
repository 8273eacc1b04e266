#include "mmd/pipeline.hpp"

#include <fstream>

#include "mmd/catalog.hpp"
#include "mmd/error.hpp"
#include "mmd/training_set.hpp"

namespace mmd {

namespace {

std::filesystem::path sidecar(const std::filesystem::path& model) {
  auto p = model;
  p += ".json";
  return p;
}

void require_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    fail(ErrorKind::Io, "file not found: " + path.string());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  require_file(path);
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::Config, "pipeline config must be a JSON object");
  PipelineConfig c;
  try {
    if (j.contains("vocabulary")) c.vocabulary = VocabularyConfig::from_json(j["vocabulary"]);
    if (j.contains("corrnet")) c.corrnet = CorrNetTrainConfig::from_json(j["corrnet"]);
    if (j.contains("agent")) c.agent = AgentHyper::from_json(j["agent"]);
    if (j.contains("fsa")) c.fsa = FsaConfig::from_json(j["fsa"]);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("pipeline config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::optional<std::filesystem::path>& path) {
  if (!path) return {};
  return from_json(read_json_file(*path));
}

void PipelineConfig::set_seed(std::uint64_t seed) {
  corrnet.seed = seed;
  agent.seed = seed;
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

CatalogBundle load_catalog_bundle(const std::filesystem::path& catalog_path) {
  require_file(catalog_path);
  const auto vocab_path = vocabulary_path_for(catalog_path);
  const auto features_path = features_path_for(catalog_path);
  require_file(vocab_path);
  require_file(features_path);
  CatalogBundle b;
  b.vocab = load_vocabulary(vocab_path);
  b.catalog = load_catalog(catalog_path, b.vocab);
  b.encoded = load_features(features_path);
  if (b.encoded.size() != b.catalog.size()) {
    fail(ErrorKind::Data, features_path.string() + " does not match " + catalog_path.string());
  }
  for (std::size_t i = 0; i < b.catalog.size(); ++i) {
    if (b.encoded.ids[i] != b.catalog[i].id) {
      fail(ErrorKind::Data, features_path.string() + ": row " + std::to_string(i) +
                                " is not " + b.catalog[i].id);
    }
  }
  return b;
}

nlohmann::json run_gen_catalog(std::size_t n, std::uint64_t seed, const PipelineConfig& config,
                               const std::filesystem::path& out) {
  Vocabulary vocab = Vocabulary::build(config.vocabulary, SeededRng(seed, streams::kVocabulary));
  vocab.set_catalog_seed(seed);
  const Catalog catalog = generate_catalog(vocab, n, SeededRng(seed, streams::kCatalog));
  const EncodedCatalog encoded = encode_catalog(catalog, FeatureEncoder(vocab));
  save_catalog(catalog, out);
  save_vocabulary(vocab, vocabulary_path_for(out));
  save_features(encoded, features_path_for(out));
  return {{"products", catalog.size()},
          {"tokens", vocab.token_count()},
          {"catalog", out.string()},
          {"vocabulary", vocabulary_path_for(out).string()},
          {"features", features_path_for(out).string()}};
}

nlohmann::json run_gen_dialogs(const std::filesystem::path& catalog_path, std::size_t sessions,
                               std::uint64_t seed, const PipelineConfig& config,
                               const std::filesystem::path& out) {
  if (sessions == 0) fail(ErrorKind::Config, "--sessions must be >= 1");
  const CatalogBundle b = load_catalog_bundle(catalog_path);
  const AttributeIndex index(b.catalog);
  const ImageSpace images(b.encoded.ids, b.encoded.image);
  const Storefront store{b.vocab, b.catalog, index, images};
  const auto dialogs = generate_dataset(store, config.fsa, sessions, SeededRng(seed, streams::kSimulator));
  std::size_t rounds = 0;
  for (const auto& s : dialogs) {
    validate_session(s, config.fsa);
    rounds += s.rounds.size();
  }
  save_sessions(dialogs, out);
  return {{"sessions", dialogs.size()}, {"rounds", rounds}, {"dialogs", out.string()}};
}

nlohmann::json run_train_corrnet(const std::filesystem::path& catalog_path,
                                 const PipelineConfig& config, const std::filesystem::path& out) {
  const CatalogBundle b = load_catalog_bundle(catalog_path);
  const StandardizedViews views = standardize_views(b.encoded);
  const CorrNetTrainResult result = train_corrnet(views.data, config.corrnet);
  save_corrnet(result.params, out);

  const Matrix hx = project_images(result.params, views.data.image);
  const Matrix hy = project_texts(result.params, views.data.text);
  nlohmann::json summary = {{"config", config.corrnet.to_json()},
                            {"loss_history", result.loss_history},
                            {"final_loss", result.loss_history.back()},
                            {"train_corr", b.catalog.size() >= 2 ? corr_term(hx, hy) : 0.0},
                            {"model", out.string()}};
  write_json_file(summary, sidecar(out));
  return summary;
}

nlohmann::json run_train_agent(const std::filesystem::path& catalog_path,
                               const std::filesystem::path& corrnet_path,
                               const std::filesystem::path& dialogs_path,
                               const PipelineConfig& config, const std::filesystem::path& out) {
  const CatalogBundle b = load_catalog_bundle(catalog_path);
  require_file(corrnet_path);
  require_file(dialogs_path);
  const JointSpace joint(b.vocab, b.encoded, load_corrnet(corrnet_path));
  const auto sessions = load_sessions(dialogs_path);
  const AgentDataset data = build_training_set(sessions, joint, config.agent);
  const AgentTrainResult result = train_agent(data.train, joint.k(), config.agent);
  save_agent(result.params, config.agent, out);

  const SeededRng eval_rng(config.agent.seed, streams::kEvaluation);
  nlohmann::json summary = {{"hyper", config.agent.to_json()},
                            {"train_rounds", data.train.size()},
                            {"test_rounds", data.test.size()},
                            {"loss_history", result.loss_history},
                            {"final_loss", result.loss_history.back()},
                            {"model", out.string()}};
  if (!data.test.empty()) {
    summary["test_mean_cosine"] = evaluate(result.params, config.agent, data.test, eval_rng);
  }
  write_json_file(summary, sidecar(out));
  return summary;
}

nlohmann::json run_evaluate(const std::filesystem::path& catalog_path,
                            const std::filesystem::path& corrnet_path,
                            const std::filesystem::path& agent_path,
                            const std::filesystem::path& dialogs_path,
                            const std::optional<std::filesystem::path>& out) {
  require_file(agent_path);
  require_file(corrnet_path);
  require_file(dialogs_path);
  const CatalogBundle b = load_catalog_bundle(catalog_path);
  const JointSpace joint(b.vocab, b.encoded, load_corrnet(corrnet_path));
  const auto [params, hyper] = load_agent(agent_path);
  if (params.k() != joint.k()) fail(ErrorKind::Data, "agent and CorrNet embedding sizes differ");
  const auto sessions = load_sessions(dialogs_path);
  const AgentDataset data = build_training_set(sessions, joint, hyper);
  if (data.test.empty()) fail(ErrorKind::Data, "no test-split rounds in " + dialogs_path.string());

  SeededRng init_rng(hyper.seed, streams::kAgent);
  const AgentParams baseline = AgentParams::initialize(joint.k(), hyper.gaussians, init_rng);
  const SeededRng eval_rng(hyper.seed, streams::kEvaluation);
  const double trained = evaluate(params, hyper, data.test, eval_rng);
  const double untrained = evaluate(baseline, hyper, data.test, eval_rng);
  nlohmann::json metrics = {{"test_mean_cosine", trained},
                            {"baseline_mean_cosine", untrained},
                            {"improvement", trained - untrained},
                            {"train_rounds", data.train.size()},
                            {"test_rounds", data.test.size()},
                            {"hyper", hyper.to_json()}};
  if (out) write_json_file(metrics, *out);
  return metrics;
}

std::shared_ptr<const EngineState> load_engine_state(
    const std::filesystem::path& catalog_path, const std::filesystem::path& corrnet_path,
    const std::optional<std::filesystem::path>& agent_path) {
  CatalogBundle b = load_catalog_bundle(catalog_path);
  require_file(corrnet_path);
  EngineAssets assets{std::move(b.vocab), std::move(b.catalog), std::move(b.encoded),
                      load_corrnet(corrnet_path), std::nullopt};
  if (agent_path) {
    require_file(*agent_path);
    assets.agent = load_agent(*agent_path);
  }
  return std::make_shared<const EngineState>(std::move(assets));
}

}  // namespace mmd
