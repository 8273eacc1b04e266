#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "mmd/agent.hpp"
#include "mmd/corrnet.hpp"
#include "mmd/engine.hpp"
#include "mmd/fsa.hpp"
#include "mmd/vocabulary.hpp"

namespace mmd {

/// Settings shared by the pipeline stages, read from one JSON document with
/// optional "vocabulary", "corrnet", "agent" and "fsa" sections.
struct PipelineConfig {
  VocabularyConfig vocabulary;
  CorrNetTrainConfig corrnet;
  AgentHyper agent;
  FsaConfig fsa = FsaConfig::defaults();

  static PipelineConfig from_json(const nlohmann::json& j);
  /// Missing path -> defaults. Throws Io / Parse / Config.
  static PipelineConfig load(const std::optional<std::filesystem::path>& path);
  /// Overrides the CorrNet and agent seeds.
  void set_seed(std::uint64_t seed);
};

/// Everything a stage reads back for a catalog: vocabulary, products and features.
struct CatalogBundle {
  Vocabulary vocab;
  Catalog catalog;
  EncodedCatalog encoded;
};

CatalogBundle load_catalog_bundle(const std::filesystem::path& catalog_path);

/// Writes `out`, its vocabulary and feature sidecars. Returns a summary.
nlohmann::json run_gen_catalog(std::size_t n, std::uint64_t seed, const PipelineConfig& config,
                               const std::filesystem::path& out);

nlohmann::json run_gen_dialogs(const std::filesystem::path& catalog_path, std::size_t sessions,
                               std::uint64_t seed, const PipelineConfig& config,
                               const std::filesystem::path& out);

/// Writes the model and `<out>.json` with the configuration and loss trajectory.
nlohmann::json run_train_corrnet(const std::filesystem::path& catalog_path,
                                 const PipelineConfig& config, const std::filesystem::path& out);

/// Writes the model and `<out>.json` with the hyperparameters and metrics.
nlohmann::json run_train_agent(const std::filesystem::path& catalog_path,
                               const std::filesystem::path& corrnet_path,
                               const std::filesystem::path& dialogs_path,
                               const PipelineConfig& config, const std::filesystem::path& out);

/// Test-split mean cosine of the trained agent and of its untrained initialisation.
nlohmann::json run_evaluate(const std::filesystem::path& catalog_path,
                            const std::filesystem::path& corrnet_path,
                            const std::filesystem::path& agent_path,
                            const std::filesystem::path& dialogs_path,
                            const std::optional<std::filesystem::path>& out);

/// Loads the engine state for serving; the agent model is optional.
std::shared_ptr<const EngineState> load_engine_state(
    const std::filesystem::path& catalog_path, const std::filesystem::path& corrnet_path,
    const std::optional<std::filesystem::path>& agent_path);

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace mmd
