#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>

#include "mmd/error.hpp"
#include "mmd/http_server.hpp"
#include "mmd/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kUsageError = 2;

mmd::HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

template <typename T>
std::optional<T> optional_of(const CLI::Option* opt, const T& value) {
  return opt->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal catalog browsing: data generation, training, evaluation and serving"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  fs::path config_path, out;
  auto* seed_opt = app.add_option("--seed", seed, "Master random seed");
  auto* config_opt = app.add_option("--config", config_path, "Pipeline config JSON");
  auto* out_opt = app.add_option("--out", out, "Output path");

  std::size_t n_products = 300;
  auto* gen_catalog = app.add_subcommand("gen-catalog", "Generate a synthetic catalog and its features");
  gen_catalog->add_option("--n", n_products, "Number of products")->check(CLI::PositiveNumber);

  fs::path catalog, corrnet, agent, dialogs, fsa_config, ui_dir;
  std::size_t n_sessions = 500;
  auto* gen_dialogs = app.add_subcommand("gen-dialogs", "Simulate dialog sessions over a catalog");
  gen_dialogs->add_option("--catalog", catalog, "Catalog JSONL")->required();
  gen_dialogs->add_option("--sessions", n_sessions, "Number of sessions")->check(CLI::PositiveNumber);
  auto* fsa_opt_dialogs = gen_dialogs->add_option("--fsa-config", fsa_config, "Automaton config JSON");

  auto* train_corrnet = app.add_subcommand("train-corrnet", "Train the joint text/image embedding");
  train_corrnet->add_option("--catalog", catalog, "Catalog JSONL")->required();

  auto* train_agent = app.add_subcommand("train-agent", "Train the mixture-sampling agent");
  train_agent->add_option("--catalog", catalog, "Catalog JSONL")->required();
  train_agent->add_option("--corrnet", corrnet, "CorrNet model")->required();
  train_agent->add_option("--dialogs", dialogs, "Sessions JSONL")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Test-split mean cosine of a trained agent");
  evaluate->add_option("--catalog", catalog, "Catalog JSONL")->required();
  evaluate->add_option("--corrnet", corrnet, "CorrNet model")->required();
  evaluate->add_option("--agent", agent, "Agent model")->required();
  evaluate->add_option("--dialogs", dialogs, "Sessions JSONL")->required();

  int port = 8080;
  std::string host = "0.0.0.0";
  auto* serve = app.add_subcommand("serve", "Serve interactive browsing sessions over HTTP");
  serve->add_option("--catalog", catalog, "Catalog JSONL")->required();
  serve->add_option("--corrnet", corrnet, "CorrNet model")->required();
  auto* agent_opt = serve->add_option("--agent", agent, "Agent model (enables agent mode)");
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
  serve->add_option("--host", host, "Listen address");
  auto* fsa_opt_serve = serve->add_option("--fsa-config", fsa_config, "Automaton config JSON");
  auto* ui_opt = serve->add_option("--ui-dir", ui_dir, "Directory of static UI assets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    auto config = mmd::PipelineConfig::load(optional_of(config_opt, config_path));
    if (seed_opt->count() || !config_opt->count()) config.set_seed(seed);
    if (fsa_opt_dialogs->count() || fsa_opt_serve->count()) config.fsa = mmd::load_fsa_config(fsa_config);

    auto need_out = [&](const char* fallback) {
      if (out.empty()) out = fallback;
    };
    nlohmann::json summary;
    if (*gen_catalog) {
      need_out("catalog.jsonl");
      summary = mmd::run_gen_catalog(n_products, seed, config, out);
    } else if (*gen_dialogs) {
      need_out("sessions.jsonl");
      summary = mmd::run_gen_dialogs(catalog, n_sessions, seed, config, out);
    } else if (*train_corrnet) {
      need_out("corrnet.bin");
      summary = mmd::run_train_corrnet(catalog, config, out);
    } else if (*train_agent) {
      need_out("agent.bin");
      summary = mmd::run_train_agent(catalog, corrnet, dialogs, config, out);
    } else if (*evaluate) {
      summary = mmd::run_evaluate(catalog, corrnet, agent, dialogs, optional_of(out_opt, out));
    } else if (*serve) {
      auto state = mmd::load_engine_state(catalog, corrnet, optional_of(agent_opt, agent));
      mmd::EngineConfig engine_config;
      engine_config.seed = seed;
      engine_config.fsa = config.fsa;
      mmd::Engine engine(std::move(state), engine_config);
      mmd::HttpService service(engine, optional_of(ui_opt, ui_dir));
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!service.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
  } catch (const mmd::Error& e) {
    std::cerr << "error (" << mmd::to_string(e.kind()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
