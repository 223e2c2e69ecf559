// Copyright 2026 The EvaNet Authors. All Rights Reserved.
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

// evanet: searches, training, ensembles, reports and kernel dumps.
// Exit codes: 0 ok, 1 training diverged, 2 usage or config error, 3 I/O error.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evanet/archive.hpp"
#include "evanet/checkpoint.hpp"
#include "evanet/config.hpp"
#include "evanet/run.hpp"

namespace fs = std::filesystem;
using namespace evanet;

namespace {

constexpr int kOk = 0;
constexpr int kDiverged = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArchiveError("cannot read " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw ArchiveError("cannot write " + file.string());
}

RunConfig load_config(const std::string& file, SearchMode mode = SearchMode::Evolution) {
  return parse_run_config(read_text(file), mode);
}

struct SearchArgs {
  std::string config;
  std::string out;
  int workers = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  bool quiet = false;
};

int cmd_search(const SearchArgs& args, SearchMode mode) {
  RunConfig config = load_config(args.config, mode);
  if (args.has_seed) config.evolution.seed = args.seed;
  if (args.workers > 0) config.evolution.workers = args.workers;
  if (const char* env = std::getenv("EVANET_WORKERS"); env && *env) {
    int w = 0;
    auto [end, ec] = std::from_chars(env, env + std::strlen(env), w);
    if (ec != std::errc() || *end != '\0' || w < 1) throw UsageError("EVANET_WORKERS must be a positive integer");
    config.evolution.workers = w;
  }
  if (!args.out.empty()) config.out = args.out;
  if (config.out.empty()) throw UsageError("no output directory (--out or \"out\" in the config)");

  const int rounds = config.evolution.rounds;
  const int every = std::max(1, rounds / 10);
  SearchObserver progress;
  if (!args.quiet) {
    progress.on_trace = [&](const TraceRow& row) {
      if (row.round % every == 0 || row.round == rounds) {
        std::cerr << "round " << row.round << "/" << rounds << " best " << row.best_fitness << " mean "
                  << row.mean_fitness << "\n";
      }
    };
  }
  const SearchRun run = run_archived_search(config, mode, config.out, progress);
  if (run.already_complete) {
    std::cout << "archive complete: " << run.result.history.size() << " individuals\n";
    return kOk;
  }
  const TopK best = top_k(run.result.history, 1);
  std::cout << "evaluations " << run.result.history.size() << "\n";
  if (run.resumed > 0) std::cout << "resumed " << run.resumed << "\n";
  std::cout << "best_fitness " << format_double(best.individuals.at(0).fitness.value) << " id "
            << best.individuals[0].id << "\n";
  return kOk;
}

int cmd_train(const std::string& genome_file, const std::string& config_file, const std::string& out) {
  const Genome genome = parse_genome(read_text(genome_file));
  const RunConfig config = load_config(config_file);
  const Dataset data = generate_toy_dataset(config.data);
  Network net;
  try {
    net = build_network(genome, config.data.num_classes, config.data.channels, config.train.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid genome: ") + e.what());
  }
  Checkpoint cp;
  cp.train = config.train;
  cp.data = config.data;
  std::vector<HistoryRow> history;
  int status = kOk;
  try {
    TrainResult result = train(std::move(net), data, config.train);
    cp.model = std::move(result.model);
    history = std::move(result.history);
  } catch (const TrainingDiverged& e) {
    std::cerr << "training diverged at iteration " << e.iteration() << "; saving the last finite weights\n";
    cp.model = e.last_finite();
    history = e.history();
    status = kDiverged;
  }
  const double val = accuracy(cp.model.network, data.val);
  const double test = accuracy(cp.model.network, data.test);
  cp.metrics = Json{{"val_accuracy", val}, {"test_accuracy", test}};
  if (!history.empty()) cp.metrics["final_loss"] = history.back().loss;
  save_checkpoint(out, cp, history);
  std::cout << "val_accuracy " << format_double(val) << "\n";
  std::cout << "test_accuracy " << format_double(test) << "\n";
  return status;
}

int cmd_ensemble(const std::vector<std::string>& dirs, const std::string& data_config, int top) {
  const RunConfig config = load_config(data_config);
  struct Loaded {
    std::string dir;
    Checkpoint cp;
  };
  std::vector<Loaded> models;
  for (const std::string& d : dirs) {
    Loaded m{d, load_checkpoint(d)};
    if (m.cp.model.network.num_classes != config.data.num_classes) {
      throw UsageError(d + ": model has " + std::to_string(m.cp.model.network.num_classes) +
                       " classes, data has " + std::to_string(config.data.num_classes));
    }
    if (m.cp.model.network.input_channels != config.data.channels) {
      throw UsageError(d + ": model expects " + std::to_string(m.cp.model.network.input_channels) +
                       " input channels");
    }
    models.push_back(std::move(m));
  }
  // Best validation accuracy first; models without one keep their order at the end.
  std::stable_sort(models.begin(), models.end(), [](const Loaded& a, const Loaded& b) {
    const auto val = [](const Loaded& m) {
      return m.cp.metrics.contains("val_accuracy") ? m.cp.metrics["val_accuracy"].get<double>() : -1.0;
    };
    return val(a) > val(b);
  });
  if (top > 0 && static_cast<std::size_t>(top) < models.size()) models.resize(static_cast<std::size_t>(top));

  const Dataset data = generate_toy_dataset(config.data);
  std::vector<Tensor> probs;
  for (const Loaded& m : models) {
    const TrainedModel one[] = {m.cp.model};
    probs.push_back(ensemble_predict(one, data.test.inputs));
    std::cout << "model " << m.dir << " test_accuracy "
              << format_double(accuracy_from_probabilities(probs.back(), data.test.labels)) << "\n";
  }
  const Tensor mean = average_probabilities(probs);
  std::cout << "ensemble test_accuracy " << format_double(accuracy_from_probabilities(mean, data.test.labels))
            << "\n";
  return kOk;
}

fs::path layers_path(const fs::path& out) {
  fs::path p = out;
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + ".layers" + (ext.empty() ? ".csv" : ext);
}

int cmd_report(const std::string& archive_dir, const std::string& out, int top) {
  if (!fs::exists(fs::path(archive_dir) / kPopulationFile)) throw ArchiveError("no archive at " + archive_dir);
  const Archive archive = read_archive(archive_dir);
  write_text(out, report_trace_csv(archive));
  write_text(layers_path(out), report_layers_csv(archive, top));
  return kOk;
}

int cmd_kernel_inspect(const std::string& checkpoint, const std::string& path, int stretch) {
  Checkpoint cp = load_checkpoint(checkpoint);
  const kernels::ItgmConv* itgm = nullptr;
  for (const NamedLayer& nl : named_layers(cp.model.network)) {
    if (nl.path != path) continue;
    itgm = std::get_if<kernels::ItgmConv>(nl.layer);
    if (!itgm) throw UsageError(path + " is a " + std::string(kernels::layer_kind_name(*nl.layer)) + " layer, not itgm");
  }
  if (!itgm) throw UsageError("no layer at " + path);

  auto print = [](const kernels::TGMParams& tgm) {
    const Tensor k = kernels::build_gaussian_mixture_kernel(tgm);
    for (std::size_t c = 0; c < k.dim(0); ++c) {
      std::cout << tgm.length << "," << c;
      for (std::size_t t = 0; t < k.dim(1); ++t) std::cout << "," << format_double(k.at({c, t}));
      std::cout << "\n";
    }
  };
  std::optional<kernels::TGMParams> stretched;
  if (stretch > 0) {
    try {
      stretched = kernels::stretch_itgm(itgm->tgm, stretch);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::cout << "length,channel,weights\n";
  print(itgm->tgm);
  if (stretched) print(*stretched);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve, train and inspect spatio-temporal video architectures."};
  app.require_subcommand(1);
  app.footer(
      "CSV outputs:\n"
      "  trace.csv, report FILE.csv: round,best_fitness,mean_fitness,evaluations\n"
      "  report FILE.layers.csv: rank,id,fitness,conv3d,conv21d,itgm,total,\n"
      "    mean_len_conv3d,mean_len_conv21d,mean_len_itgm\n"
      "  history.csv: iteration,loss,val_accuracy (empty when not measured)\n"
      "  kernel-inspect: length,channel,weights... (one row per output channel)\n"
      "Exit codes: 0 ok, 1 training diverged, 2 usage or config error, 3 I/O error.\n"
      "EVANET_WORKERS overrides --workers.");

  SearchArgs evolve_args;
  SearchArgs random_args;
  auto add_search = [&](const char* name, const char* help, SearchArgs& a) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", a.config, "Run config JSON")->required();
    sub->add_option("--out", a.out, "Archive directory (overrides \"out\")");
    sub->add_option("--workers", a.workers, "Concurrent evaluations")->check(CLI::PositiveNumber);
    sub->add_option("--seed", a.seed, "Overrides evolution.seed")->each([&a](const std::string&) { a.has_seed = true; });
    sub->add_flag("--quiet", a.quiet, "No progress on stderr");
    return sub;
  };
  CLI::App* evolve = add_search("evolve", "Regularized evolution; resumes a partial archive", evolve_args);
  CLI::App* random = add_search("random-search", "Random-search baseline with the same budget", random_args);

  std::string genome_file, train_config, train_out;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one genome and write a checkpoint");
  train_cmd->add_option("--genome", genome_file, "Genome JSON")->required();
  train_cmd->add_option("--config", train_config, "Run config JSON (train and data sections)")->required();
  train_cmd->add_option("--out", train_out, "Checkpoint directory")->required();

  std::vector<std::string> models;
  std::string data_config;
  int top = 0;
  CLI::App* ensemble = app.add_subcommand("ensemble", "Test accuracy of each model and of their softmax average");
  ensemble->add_option("--models", models, "Checkpoint directories")->required();
  ensemble->add_option("--data-config", data_config, "Run config JSON (data section)")->required();
  ensemble->add_option("--top", top, "Use the K models with the best validation accuracy (0: all)")
      ->check(CLI::NonNegativeNumber);

  std::string archive_dir, report_out;
  int report_top = 3;
  CLI::App* report = app.add_subcommand("report", "Trace and top-k layer statistics as CSV");
  report->add_option("--archive", archive_dir, "Run archive directory")->required();
  report->add_option("--out", report_out, "Trace CSV; layer table goes to FILE.layers.csv")->required();
  report->add_option("--top", report_top, "Genomes in the layer table")->check(CLI::PositiveNumber);

  std::string checkpoint, layer_path;
  int stretch = 0;
  CLI::App* inspect = app.add_subcommand("kernel-inspect", "Dump an itgm layer's temporal mixture kernel");
  inspect->add_option("--checkpoint", checkpoint, "Checkpoint directory or manifest.json")->required();
  inspect->add_option("--layer", layer_path, "Layer path, e.g. modules/0/repeat/0/streams/1/layers/1")->required();
  inspect->add_option("--stretch", stretch, "Also print the kernel stretched to this length")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*evolve) return cmd_search(evolve_args, SearchMode::Evolution);
    if (*random) return cmd_search(random_args, SearchMode::RandomSearch);
    if (*train_cmd) return cmd_train(genome_file, train_config, train_out);
    if (*ensemble) return cmd_ensemble(models, data_config, top);
    if (*report) return cmd_report(archive_dir, report_out, report_top);
    if (*inspect) return cmd_kernel_inspect(checkpoint, layer_path, stretch);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GenomeParseError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kUsage;
  } catch (const ArchiveError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
