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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <gtest/gtest.h>

#include "evanet/archive.hpp"
#include "evanet/checkpoint.hpp"
#include "evanet/config.hpp"
#include "evanet/run.hpp"
#include "evanet/surrogate.hpp"
#include "test_util.hpp"

namespace evanet {
namespace {
namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("evanet_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(std::string_view text, SearchMode mode = SearchMode::Evolution) {
  try {
    parse_run_config(text, mode);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

RunConfig small_search(std::uint64_t seed, int rounds) {
  RunConfig c;
  c.evolution.population = 16;
  c.evolution.tournament_size = 8;
  c.evolution.rounds = rounds;
  c.evolution.r = 25;
  c.evolution.seed = seed;
  return c;
}

// --- config --------------------------------------------------------------------

TEST(RunConfig, EmptyDocumentGivesDefaults) {
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.evolution.population, 50);
  EXPECT_EQ(c.evolution.tournament_size, 25);
  EXPECT_EQ(c.evolution.rounds, 2000);
  EXPECT_EQ(c.evolution.d, 7);
  EXPECT_EQ(c.evolution.r, 100);
  EXPECT_EQ(c.evaluator, EvaluatorKind::Surrogate);
  EXPECT_EQ(c.train, TrainConfig{});
  EXPECT_EQ(c.surrogate.length_tolerance, SurrogateLandscape{}.length_tolerance);
}

TEST(RunConfig, ParsesEveryField) {
  const RunConfig c = parse_run_config(R"({
    "evolution": {"population": 8, "tournament_size": 4, "rounds": 60, "d": 3, "r": 10,
                  "schedule": "constant", "removal": "oldest", "seed": 42, "workers": 3,
                  "meta": "inception", "evaluator": "train"},
    "constraints": {"allowed_temporal_lens": [1, 3], "max_streams": 2, "max_repeats": 3,
                    "conv_kinds": ["itgm"], "pool_kinds": ["maxpool", "avgpool"]},
    "surrogate": {"seed": 5, "noise": 0.1, "length_tolerance": 2,
                  "weights": {"layer_kind": 2, "temporal_len": 0.5, "stream_count": 1,
                              "stream_type": 3, "repeats": 1}},
    "train": {"iterations": 300, "batch_size": 4, "learning_rate": 0.01, "momentum": 0.5,
              "seed": 9, "eval_every": 50},
    "data": {"frames": 8, "height": 16, "width": 16, "channels": 1, "num_classes": 4,
             "square": 4, "noise": 0.0, "train_samples": 40, "val_samples": 20,
             "test_samples": 20, "seed": 7},
    "out": "runs/a"})");
  EXPECT_EQ(c.evolution.population, 8);
  EXPECT_EQ(c.evolution.schedule, Schedule::Constant);
  EXPECT_EQ(c.evolution.removal, Removal::Oldest);
  EXPECT_EQ(c.evolution.seed, 42u);
  EXPECT_EQ(c.evolution.workers, 3);
  EXPECT_EQ(c.evolution.meta, MetaKind::InceptionLike);
  EXPECT_EQ(c.evaluator, EvaluatorKind::Train);
  EXPECT_EQ(c.evolution.constraints.allowed_temporal_lens, (std::vector<int>{1, 3}));
  EXPECT_EQ(c.evolution.constraints.conv_kinds, std::vector<LayerKind>{LayerKind::ConvITGM});
  EXPECT_EQ(c.evolution.constraints.pool_kinds.size(), 2u);
  EXPECT_EQ(c.surrogate.weights.stream_type, 3.0);
  EXPECT_EQ(c.surrogate.length_tolerance, 2);
  EXPECT_EQ(c.train.eval_every, 50);
  EXPECT_EQ(c.data.num_classes, 4);
  EXPECT_EQ(c.out, "runs/a");
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c = small_search(3, 40);
  c.surrogate.noise = 0.25;
  c.train.iterations = 12;
  c.out = "x";
  const Json j = run_config_to_json(c);
  const RunConfig back = parse_run_config(j.dump());
  EXPECT_EQ(run_config_to_json(back), j);
}

TEST(RunConfig, StrictErrors) {
  EXPECT_NE(config_error(R"({"evolutoin": {}})").find("/evolutoin: unknown field"), std::string::npos);
  EXPECT_NE(config_error(R"({"train": {"lr": 1}})").find("/train/lr: unknown field"), std::string::npos);
  EXPECT_NE(config_error(R"({"evolution": {"rounds": "many"}})").find("/evolution/rounds"), std::string::npos);
  EXPECT_NE(config_error(R"({"evolution": {"seed": -1}})").find("/evolution/seed"), std::string::npos);
  EXPECT_NE(config_error(R"({"evolution": {"schedule": "cosine"}})").find("cosine"), std::string::npos);
  EXPECT_NE(config_error(R"({"evolution": {"population": 4, "tournament_size": 5}})").find("1 < S <= P"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"train": {"iterations": 0}})").find("iterations"), std::string::npos);
  EXPECT_NE(config_error(R"({"data": {"num_classes": 3}})").find("num_classes"), std::string::npos);
  EXPECT_NE(config_error(R"({"constraints": {"conv_kinds": ["maxpool"]}})"), "");
  EXPECT_NE(config_error(R"({"surrogate": {"noise": 2}})"), "");
  EXPECT_NE(config_error("[1, 2]"), "");
}

TEST(RunConfig, MalformedJsonReportsLineAndColumn) {
  EXPECT_EQ(config_error("{\n  \"out\": \"a\",,\n}"), "malformed JSON at line 2, column 14");
  EXPECT_EQ(config_error("{"), "malformed JSON at line 1, column 2");
}

TEST(RunConfig, RandomSearchRejectsMutationKeys) {
  for (const char* key : {"d", "r", "tournament_size"}) {
    const std::string text = std::string(R"({"evolution": {")") + key + R"(": 3}})";
    EXPECT_NE(config_error(text, SearchMode::RandomSearch).find("not applicable"), std::string::npos) << key;
    EXPECT_EQ(config_error(text, SearchMode::Evolution), "") << key;
  }
  EXPECT_NE(config_error(R"({"evolution": {"schedule": "annealed"}})", SearchMode::RandomSearch), "");
  const RunConfig c = parse_run_config(R"({"evolution": {"population": 4, "removal": "oldest"}})",
                                       SearchMode::RandomSearch);
  EXPECT_EQ(c.evolution.removal, Removal::Oldest);
  const Json j = run_config_to_json(c, SearchMode::RandomSearch);
  EXPECT_FALSE(j["evolution"].contains("d"));
  EXPECT_FALSE(j["evolution"].contains("schedule"));
  EXPECT_NO_THROW(parse_run_config(j.dump(), SearchMode::RandomSearch));
}

TEST(RunConfig, LandscapeFollowsSurrogateSection) {
  RunConfig c;
  c.surrogate.seed = 17;
  c.surrogate.noise = 0.3;
  const SurrogateLandscape land = make_landscape(c);
  EXPECT_EQ(land.target, default_landscape(MetaKind::Toy, 17).target);
  EXPECT_EQ(land.noise, 0.3);
}

// --- archive -------------------------------------------------------------------

TEST(Archive, IndividualRoundTrip) {
  const SurrogateLandscape land = default_landscape(MetaKind::Toy, 0);
  const EvolutionResult r = run_evolution(small_search(1, 30).evolution,
                                          [&](const Genome& g) { return surrogate_fitness(g, land); });
  for (const Individual& ind : r.history) {
    const Json j = individual_to_json(ind);
    const Individual back = individual_from_json(Json::parse(j.dump()));
    EXPECT_EQ(individual_to_json(back).dump(), j.dump());
    EXPECT_EQ(back.genome, ind.genome);
    EXPECT_EQ(back.fitness.value, ind.fitness.value);
    EXPECT_EQ(back.parent_id, ind.parent_id);
    EXPECT_EQ(back.mutations.size(), ind.mutations.size());
  }
}

TEST(Archive, TruncatedLineIgnoredOnReadAndDroppedOnReopen) {
  const fs::path dir = fresh_dir("truncated");
  Individual a;
  a.genome = testing::small_toy_genome();
  {
    ArchiveWriter w(dir, Json{{"k", 1}});
    w.append(a);
    a.id = 1;
    w.append(a);
  }
  {
    std::ofstream out(dir / kPopulationFile, std::ios::app);
    out << R"({"id": 2, "parent)";
  }
  EXPECT_EQ(read_population(dir / kPopulationFile).size(), 2u);
  {
    ArchiveWriter w(dir, Json{{"k", 1}});
    a.id = 2;
    w.append(a);
  }
  const auto back = read_population(dir / kPopulationFile);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[2].id, 2);
}

TEST(Archive, CorruptLineThrows) {
  const fs::path dir = fresh_dir("corrupt");
  std::ofstream(dir / kPopulationFile) << "not json\n";
  EXPECT_THROW(read_population(dir / kPopulationFile), ArchiveError);
  EXPECT_THROW(read_archive(fresh_dir("missing") / "nope"), ArchiveError);
}

TEST(Archive, TraceRoundTrip) {
  const fs::path dir = fresh_dir("trace");
  const std::vector<TraceRow> rows{{1, 0.5, 0.25, 17}, {2, 1.0 / 3, 0.1, 18}};
  {
    ArchiveWriter w(dir, Json::object());
    for (const TraceRow& r : rows) w.append(r);
  }
  EXPECT_EQ(read_trace(dir / kTraceFile), rows);
  EXPECT_EQ(slurp(dir / kTraceFile).substr(0, 44), "round,best_fitness,mean_fitness,evaluations\n");
}

TEST(Archive, ArchivedSearchIsReproducibleAndResumable) {
  const RunConfig c = small_search(7, 50);
  const fs::path a = fresh_dir("run_a");
  const fs::path b = fresh_dir("run_b");
  const SearchRun ra = run_archived_search(c, SearchMode::Evolution, a);
  run_archived_search(c, SearchMode::Evolution, b);
  EXPECT_EQ(slurp(a / kPopulationFile), slurp(b / kPopulationFile));
  EXPECT_EQ(slurp(a / kTraceFile), slurp(b / kTraceFile));
  EXPECT_EQ(slurp(a / kConfigFile), slurp(b / kConfigFile));
  EXPECT_EQ(read_population(a / kPopulationFile).size(), 66u);

  // Cut b mid-line and resume.
  const std::string full = slurp(b / kPopulationFile);
  std::size_t cut = 0;
  for (int i = 0; i < 30; ++i) cut = full.find('\n', cut) + 1;
  {
    std::ofstream out(b / kPopulationFile, std::ios::binary | std::ios::trunc);
    out << full.substr(0, cut + 25);
  }
  const SearchRun rb = run_archived_search(c, SearchMode::Evolution, b);
  EXPECT_EQ(rb.resumed, 30u);
  EXPECT_EQ(slurp(b / kPopulationFile), full);
  EXPECT_EQ(slurp(a / kTraceFile), slurp(b / kTraceFile));

  const SearchRun again = run_archived_search(c, SearchMode::Evolution, a);
  EXPECT_TRUE(again.already_complete);
  EXPECT_EQ(again.result.history.size(), ra.result.history.size());

  RunConfig other = c;
  other.evolution.seed = 8;
  EXPECT_THROW(run_archived_search(other, SearchMode::Evolution, a), ConfigError);
  EXPECT_THROW(run_archived_search(c, SearchMode::RandomSearch, a), ConfigError);
  RunConfig more_workers = c;
  more_workers.evolution.workers = 4;
  EXPECT_TRUE(run_archived_search(more_workers, SearchMode::Evolution, a).already_complete);
}

TEST(Archive, RandomSearchArchiveSharesTheFormat) {
  const RunConfig c = small_search(2, 20);
  const fs::path dir = fresh_dir("random");
  run_archived_search(c, SearchMode::RandomSearch, dir);
  const Archive a = read_archive(dir);
  EXPECT_EQ(a.individuals.size(), 36u);
  EXPECT_EQ(a.trace.size(), 20u);
  EXPECT_EQ(a.config["search"], "random_search");
}

// --- checkpoint ----------------------------------------------------------------

TEST(Checkpoint, RoundTripIsExact) {
  ToyVideoSpec spec;
  spec.frames = 8;
  spec.height = spec.width = 16;
  spec.square = 4;
  spec.train_samples = 16;
  spec.val_samples = spec.test_samples = 8;
  const Dataset data = generate_toy_dataset(spec);
  TrainConfig tc;
  tc.iterations = 3;
  tc.eval_every = 2;
  TrainResult r = train(build_network(testing::small_toy_genome(), 8, 1, 0), data, tc);

  const fs::path dir = fresh_dir("checkpoint");
  Checkpoint cp{r.model, tc, spec, Json{{"test_accuracy", 0.5}}};
  save_checkpoint(dir, cp, r.history);
  const Checkpoint back = load_checkpoint(dir / "manifest.json");
  EXPECT_EQ(back.train, tc);
  EXPECT_EQ(back.model.iteration, 3);
  EXPECT_EQ(back.metrics["test_accuracy"], 0.5);
  const Tensor x = forward(r.model.network, data.test.inputs[0]);
  const Tensor y = forward(back.model.network, data.test.inputs[0]);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);

  const std::string hist = slurp(dir / "history.csv");
  EXPECT_EQ(hist.substr(0, 28), "iteration,loss,val_accuracy\n");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 4);

  Json m = Json::parse(slurp(dir / "manifest.json"));
  m["genome_hash"] = "0000000000000000";
  std::ofstream(dir / "manifest.json") << m.dump();
  EXPECT_THROW(load_checkpoint(dir), GenomeParseError);
  EXPECT_THROW(load_checkpoint(fresh_dir("empty")), ArchiveError);
}

// --- report --------------------------------------------------------------------

TEST(Report, TraceStopsAtLastCommittedRound) {
  Archive a;
  a.config = Json{{"evolution", {{"population", 2}}}};
  a.individuals.resize(4);
  for (int i = 0; i < 4; ++i) {
    a.individuals[i].id = i;
    a.individuals[i].genome = testing::small_toy_genome();
  }
  a.trace = {{1, 0.5, 0.25, 3}, {2, 0.5, 0.5, 4}, {3, 1, 0.75, 5}};
  EXPECT_EQ(report_trace_csv(a), "round,best_fitness,mean_fitness,evaluations\n1,0.5,0.25,3\n2,0.5,0.5,4\n");
}

}  // namespace
}  // namespace evanet
