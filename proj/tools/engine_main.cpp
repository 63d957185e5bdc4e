#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <pthread.h>
#include <signal.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "reenact/engine/commands.hpp"
#include "reenact/engine/server.hpp"
#include "reenact/error.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

/// --config files: {"<subcommand>": {"<long flag name>": value, ...}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : obj.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("engine");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("ENGINE_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string(level) != "off")
      spdlog::warn("ENGINE_LOG='{}' not recognized; using info", level);
    else
      spdlog::set_level(parsed);
  }
}

int run_serve(const reenact::engine::ServerConfig& config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  reenact::engine::Server server(config);
  server.start();
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    server.stop();
  });
  server.run();
  server.stop();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Head reenactment engine"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the command-line flags, keyed by subcommand");

  reenact::engine::ServerConfig serve_cfg;
  std::string neural_endpoint;
  auto* serve = app.add_subcommand("serve", "Run the live session service");
  serve->add_option("--host", serve_cfg.host, "IPv4 address to bind")->capture_default_str();
  serve->add_option("--port", serve_cfg.port, "TCP port (0 picks a free one)")->capture_default_str();
  serve->add_option("--models-dir", serve_cfg.models_dir, "Directory of model directories");
  serve->add_option("--profiles-dir", serve_cfg.profiles_dir, "Directory of profile JSON files");
  serve->add_option("--neural-endpoint", neural_endpoint, "host:port of the inference service");
  serve->add_option("--bootstrap-frames", serve_cfg.tracker.bootstrap_frames,
                    "Frames buffered before a session's identity is frozen")
      ->capture_default_str();

  reenact::engine::FitTargetOptions fit;
  std::string fit_export, fit_images;
  auto* fit_cmd = app.add_subcommand("fit-target", "Fit a target profile from a landmark file");
  fit_cmd->add_option("--landmarks", fit.landmarks, "JSONL landmark file")->required();
  fit_cmd->add_option("--model", fit.model, "Model directory or 'synthetic[-seed]'")->capture_default_str();
  fit_cmd->add_option("--out", fit.out_profile, "Profile JSON to write")->required();
  fit_cmd->add_option("--label", fit.label, "Display name (default: file stem)");
  fit_cmd->add_option("--export", fit_export, "Also export the conditioning dataset here");
  fit_cmd->add_option("--images", fit_images, "Directory of real frames %06d.png for the export");
  fit_cmd->add_option("--fps", fit.fps, "Manifest frame rate (default: from timestamps)");

  reenact::engine::ReenactOptions re;
  bool no_retarget = false, no_gaze = false, no_clamp = false;
  std::string re_neural;
  auto* re_cmd = app.add_subcommand("reenact", "Drive a target profile with a source landmark file");
  re_cmd->add_option("--landmarks", re.landmarks, "Source JSONL landmark file")->required();
  re_cmd->add_option("--profile", re.profile, "Target profile JSON")->required();
  re_cmd->add_option("--out", re.out_dir, "Output directory")->required();
  re_cmd->add_option("--model", re.model, "Model directory (default: the profile's model)");
  re_cmd->add_flag("--no-retarget", no_retarget, "Keep source scale and translation");
  re_cmd->add_option("--gain", re.policy.expression_gain, "Expression gain")->capture_default_str();
  re_cmd->add_flag("--no-gaze", no_gaze, "Neutral gaze instead of the source's");
  re_cmd->add_flag("--no-clamp", no_clamp, "Do not clamp expressions to the target's range");
  re_cmd->add_option("--neural-endpoint", re_neural, "host:port of the inference service");
  re_cmd->add_option("--fps", re.fps, "Manifest frame rate (default: from timestamps)");

  reenact::engine::BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Measure pipeline throughput on a synthetic stream");
  bench_cmd->add_option("--model", bench.model, "Model directory or 'synthetic[-seed]'")->capture_default_str();
  bench_cmd->add_option("--size", bench.size, "Square image size")->capture_default_str();
  bench_cmd->add_option("--frames", bench.frames, "Frames to process")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Stream seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (serve->parsed()) {
      if (!neural_endpoint.empty()) serve_cfg.neural_endpoint = neural_endpoint;
      return run_serve(serve_cfg);
    }
    if (fit_cmd->parsed()) {
      if (!fit_export.empty()) fit.export_dir = fit_export;
      if (!fit_images.empty()) fit.images_dir = fit_images;
      reenact::engine::fit_target(fit);
      return 0;
    }
    if (re_cmd->parsed()) {
      re.policy.retarget_pose = !no_retarget;
      re.policy.transfer_gaze = !no_gaze;
      re.policy.clamp_expression = !no_clamp;
      if (!re_neural.empty()) re.neural_endpoint = re_neural;
      reenact::engine::reenact(re);
      return 0;
    }
    if (bench_cmd->parsed()) {
      std::cout << reenact::engine::bench(bench).to_json() << std::endl;
      return 0;
    }
  } catch (const reenact::Error& e) {
    spdlog::error("{}", e.what());
    return e.is_data_error() ? kExitData : kExitRuntime;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
