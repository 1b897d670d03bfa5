// tools/phonegan.cc
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// phonegan: command-line driver for the pipeline stages.
//
// Exit codes: 0 success, 2 usage or configuration, 3 input file (missing,
// malformed or stale), 4 runtime failure. Failures print one JSON object
// on standard error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "phonegan/numcore/error.h"
#include "phonegan/pipeline/artifacts.h"
#include "phonegan/pipeline/config.h"
#include "phonegan/pipeline/manifest.h"
#include "phonegan/pipeline/stages.h"

namespace {

using nlohmann::json;
using namespace phonegan;

constexpr int kUsage = 2;
constexpr int kInput = 3;
constexpr int kRuntime = 4;

int Fail(int code, json error) {
  std::cerr << error.dump() << std::endl;
  return code;
}

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

void AddCommon(CLI::App *cmd, CommonArgs &args) {
  cmd->add_option("--config", args.config, "key=value configuration file");
  cmd->add_option("--set", args.overrides, "key=value override (repeatable)");
  cmd->add_option("--seed", args.seed, "root seed");
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--jobs", args.jobs, "parallel workers")
      ->check(CLI::PositiveNumber);
}

StageContext MakeContext(const CommonArgs &args) {
  StageContext ctx;
  if (!args.config.empty()) {
    ApplyConfigText(ctx.config, ReadFileText(args.config), args.config);
  }
  ApplyOverrides(ctx.config, args.overrides);
  if (args.seed) ctx.config.seed = *args.seed;
  DeriveStageSeeds(ctx.config);
  ctx.out = args.out;
  ctx.jobs = args.jobs;
  ctx.log = [](const std::string &line) { std::cerr << line << std::endl; };
  return ctx;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Unsupervised phoneme recognition pipeline"};
  app.require_subcommand(1);
  CommonArgs common;

  auto *synth = app.add_subcommand("synth", "generate a synthetic world and corpus");
  AddCommon(synth, common);

  std::string features, features_test;
  auto *embed = app.add_subcommand("embed", "embed segments of a feature file");
  AddCommon(embed, common);
  embed->add_option("--features", features)->required();
  embed->add_option("--features-test", features_test);

  std::string embeddings, embeddings_test;
  auto *cluster = app.add_subcommand("cluster", "K-means over segment embeddings");
  AddCommon(cluster, common);
  cluster->add_option("--embeddings", embeddings)->required();
  cluster->add_option("--embeddings-test", embeddings_test);

  TextInputs text;
  std::string clusters, probe_labels;
  auto *train = app.add_subcommand("train-gan", "train the cluster-to-phoneme mapping");
  AddCommon(train, common);
  train->add_option("--clusters", clusters)->required();
  train->add_option("--text", text.text)->required();
  train->add_option("--lexicon", text.lexicon)->required();
  train->add_option("--phonemes", text.phonemes);
  train->add_option("--probe-labels", probe_labels,
                    "labeled file whose accuracy is logged, never trained on");

  std::string mapping;
  auto *decode = app.add_subcommand("decode", "decode cluster sequences with a mapping");
  AddCommon(decode, common);
  decode->add_option("--mapping", mapping)->required();
  decode->add_option("--clusters", clusters)->required();

  std::string decoded, reference, train_reference, phonemes;
  auto *eval = app.add_subcommand("eval", "score decoded phonemes");
  AddCommon(eval, common);
  eval->add_option("--decoded", decoded)->required();
  eval->add_option("--reference", reference)->required();
  eval->add_option("--clusters", clusters);
  eval->add_option("--train-reference", train_reference);
  eval->add_option("--phonemes", phonemes);

  auto *sweep = app.add_subcommand("sweep", "cluster-count sweep");
  AddCommon(sweep, common);
  sweep->add_option("--embeddings", embeddings)->required();
  sweep->add_option("--embeddings-test", embeddings_test);
  sweep->add_option("--text", text.text)->required();
  sweep->add_option("--lexicon", text.lexicon)->required();
  sweep->add_option("--phonemes", text.phonemes);

  std::vector<std::string> runs;
  auto *ensemble = app.add_subcommand("ensemble", "majority vote over trained mappings");
  AddCommon(ensemble, common);
  ensemble->add_option("--runs", runs, "directories holding mapping.json")
      ->required();
  ensemble->add_option("--clusters", clusters)->required();
  ensemble->add_option("--reference", reference);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    return Fail(kUsage, {{"error", "usage"}, {"message", e.what()}});
  }

  try {
    const StageContext ctx = MakeContext(common);
    if (*synth) {
      RunSynth(ctx);
    } else if (*embed) {
      RunEmbed(ctx, features, features_test);
    } else if (*cluster) {
      RunCluster(ctx, embeddings, embeddings_test);
    } else if (*train) {
      RunTrainGan(ctx, clusters, text, probe_labels);
    } else if (*decode) {
      RunDecode(ctx, mapping, clusters);
    } else if (*eval) {
      RunEval(ctx, decoded, reference, clusters, train_reference, phonemes);
    } else if (*sweep) {
      RunSweep(ctx, embeddings, embeddings_test, text);
    } else if (*ensemble) {
      std::vector<fs::path> dirs(runs.begin(), runs.end());
      RunEnsemble(ctx, dirs, clusters, reference);
    }
  } catch (const ConfigError &e) {
    json j{{"error", "config"}, {"message", e.what()}, {"key", e.key()}};
    if (!e.source().empty()) j["file"] = e.source();
    if (e.line() > 0) j["line"] = e.line();
    return Fail(kUsage, j);
  } catch (const FormatError &e) {
    json j{{"error", "input"}, {"message", e.message()}, {"file", e.file()}};
    if (e.line() > 0) j["line"] = e.line();
    if (!e.field().empty()) j["field"] = e.field();
    return Fail(kInput, j);
  } catch (const StaleInputError &e) {
    return Fail(kInput, {{"error", "stale_input"},
                         {"message", e.what()},
                         {"file", e.file()},
                         {"manifest", e.manifest()}});
  } catch (const DivergenceError &e) {
    return Fail(kRuntime,
                {{"error", "divergence"}, {"message", e.what()}, {"step", e.step()}});
  } catch (const std::exception &e) {
    return Fail(kRuntime, {{"error", "runtime"}, {"message", e.what()}});
  }
  return 0;
}
