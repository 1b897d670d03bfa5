// tests/unit/pipeline_test.cc
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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <json.hpp>

#include "phonegan/pipeline/artifacts.h"
#include "phonegan/pipeline/config.h"
#include "phonegan/pipeline/manifest.h"
#include "phonegan/pipeline/stages.h"

using namespace phonegan;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("phonegan_pipeline_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path &path() const { return path_; }

 private:
  fs::path path_;
};

void Write(const fs::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

StageContext SmallContext(const fs::path &out, std::uint64_t seed = 3) {
  StageContext ctx;
  ApplyOverrides(ctx.config, {"synth.num_phonemes=4", "synth.train_utterances=30",
                              "synth.test_utterances=10", "synth.text_sentences=30",
                              "audio2vec.encoder=mean", "audio2vec.cmvn=false",
                              "cluster.k=4", "ganmap.iterations=20", "ganmap.batch=8",
                              "ganmap.seq_len=8", "ganmap.log_every=10"});
  ctx.config.seed = seed;
  DeriveStageSeeds(ctx.config);
  ctx.out = out;
  return ctx;
}

StageContext At(StageContext ctx, const fs::path &out) {
  ctx.out = out;
  return ctx;
}

// synth -> embed -> cluster -> train-gan -> decode -> eval under root.
void RunChain(const StageContext &base, const fs::path &root) {
  const fs::path syn = root / "syn", emb = root / "emb", cl = root / "cl",
                 gan = root / "gan", dec = root / "dec", ev = root / "ev";
  RunSynth(At(base, syn));
  RunEmbed(At(base, emb), syn / "train.features.jsonl", syn / "test.features.jsonl");
  RunCluster(At(base, cl), emb / "embeddings.jsonl", emb / "embeddings_test.jsonl");
  RunTrainGan(At(base, gan), cl / "clusters.jsonl",
              TextInputs{syn / "text.txt", syn / "lexicon.tsv", syn / "phonemes.txt"}, {});
  RunDecode(At(base, dec), gan / "mapping.json", cl / "clusters_test.jsonl");
  RunEval(At(base, ev), dec / "decoded.jsonl", emb / "embeddings_test.jsonl",
          cl / "clusters_test.jsonl", emb / "embeddings.jsonl", syn / "phonemes.txt");
}

}  // namespace

TEST(Config, KeysRoundTripThroughResolvedText) {
  PipelineConfig c;
  const std::vector<std::string> keys = ConfigKeys();
  EXPECT_GT(keys.size(), 40u);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  PipelineConfig back;
  back.cluster.k = 1;
  ApplyConfigText(back, ResolvedConfigText(c), "resolved");
  EXPECT_EQ(ResolvedConfigText(back), ResolvedConfigText(c));
}

TEST(Config, SetAndGet) {
  PipelineConfig c;
  SetConfigValue(c, "cluster.k", "17");
  EXPECT_EQ(c.cluster.k, 17u);
  EXPECT_EQ(GetConfigValue(c, "cluster.k"), "17");
  SetConfigValue(c, "ganmap.mode", "softmax");
  EXPECT_EQ(GetConfigValue(c, "ganmap.mode"), "softmax");
  SetConfigValue(c, "ganmap.branch_widths", "3,5");
  EXPECT_EQ(c.ganmap.disc.branch_widths, (std::vector<std::size_t>{3, 5}));
  SetConfigValue(c, "audio2vec.cmvn", "false");
  EXPECT_FALSE(c.audio2vec.cmvn);
  SetConfigValue(c, "ganmap.lr_g", "0.25");
  EXPECT_EQ(c.ganmap.lr_g, 0.25);
}

TEST(Config, ErrorsCarryKeyAndLine) {
  PipelineConfig c;
  EXPECT_THROW(SetConfigValue(c, "no.such_key", "1"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "cluster.k", "abc"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "cluster.k", "-3"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "ganmap.mode", "argmax"), ConfigError);
  EXPECT_THROW(SetConfigValue(c, "audio2vec.cmvn", "maybe"), ConfigError);
  try {
    ApplyConfigText(c, "# comment\n\ncluster.k = 5\nganmap.lr_g=x\n", "my.cfg");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.key(), "ganmap.lr_g");
    EXPECT_EQ(e.source(), "my.cfg");
    EXPECT_EQ(e.line(), 4);
  }
  EXPECT_EQ(c.cluster.k, 5u);
  EXPECT_THROW(ApplyConfigText(c, "just words\n", "f"), ConfigError);
}

TEST(Config, StageSeedsAreDistinctAndStable) {
  PipelineConfig a, b;
  a.seed = b.seed = 11;
  DeriveStageSeeds(a);
  DeriveStageSeeds(b);
  EXPECT_EQ(ResolvedConfigText(a), ResolvedConfigText(b));
  EXPECT_NE(a.cluster.seed, a.ganmap.seed);
  EXPECT_NE(a.synth.world.seed, a.synth.corpus.seed);
  EXPECT_EQ(a.ganmap.seed, StageSeed(11, "ganmap"));
  EXPECT_NE(StageSeed(11, "ganmap"), StageSeed(12, "ganmap"));
}

TEST(Artifacts, ClustersRoundTripAndErrors) {
  TempDir dir;
  const std::vector<ClusterIndexSequence> seqs{{"a", {1, 2, 3}}, {"b", {4}}};
  const fs::path p = dir.path() / "c.jsonl";
  Write(p, ClustersToJsonl(seqs));
  const auto back = ReadClusters(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].id, "b");
  EXPECT_EQ(back[0].indices, seqs[0].indices);

  Write(p, "{\"id\":\"a\",\"indices\":[1]}\n{\"id\":\"b\",\"indices\":[0]}\n");
  try {
    ReadClusters(p);
    FAIL() << "expected FormatError";
  } catch (const FormatError &e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.field(), "indices");
    EXPECT_EQ(e.file(), p.string());
  }
  Write(p, "{\"id\":\"a\",\"indices\":[1]}\n{oops\n");
  EXPECT_THROW(ReadClusters(p), FormatError);
  EXPECT_THROW(ReadClusters(dir.path() / "missing.jsonl"), FormatError);
}

TEST(Artifacts, MappingAndCodebookRoundTrip) {
  TempDir dir;
  Mapping m{LookupTable(Tensor({2, 3}, {0.1, -2.0, 3.5, 1e-17, 0.0, 123456.789})),
            {"x", "y", "z"}};
  const fs::path p = dir.path() / "m.json";
  Write(p, MappingToJson(m));
  const Mapping back = ReadMapping(p);
  EXPECT_EQ(back.table.logits().values(), m.table.logits().values());
  EXPECT_EQ(back.phoneme_names, m.phoneme_names);
  EXPECT_EQ(MappingToJson(back), MappingToJson(m));

  const Codebook cb{Tensor({2, 2}, {1.0 / 3.0, 2.0, -0.5, 7.0})};
  Write(p, CodebookToJson(cb));
  EXPECT_EQ(ReadCodebook(p).centroids.values(), cb.centroids.values());
}

TEST(Artifacts, EmbeddingsAndDecodedRoundTrip) {
  TempDir dir;
  const fs::path p = dir.path() / "e.jsonl";
  const std::vector<UtteranceEmbeddings> e{{"u1", Tensor({2, 2}, {1, 2, 3, 4}), {0, 1}},
                                           {"u2", Tensor({1, 2}, {5, 6}), {}}};
  Write(p, EmbeddingsToJsonl(e));
  const auto back = ReadEmbeddings(p);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].embeddings.values(), e[0].embeddings.values());
  EXPECT_EQ(back[0].labels, e[0].labels);
  EXPECT_TRUE(back[1].labels.empty());

  const std::vector<DecodedUtterance> d{{"u1", {0, 2, 1}}};
  Write(p, DecodedToJsonl(d));
  EXPECT_EQ(ReadDecoded(p)[0].phonemes, d[0].phonemes);
}

TEST(Manifest, HashesAndStaleDetection) {
  EXPECT_EQ(Sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Sha256Hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  TempDir dir;
  const fs::path f = dir.path() / "data.txt";
  Write(f, "abc");
  EXPECT_EQ(Sha256File(f), Sha256Hex("abc"));
  Manifest m;
  m.command = "test";
  m.seed = 4;
  m.outputs.push_back(HashEntry(f, "data.txt"));
  EXPECT_EQ(m.outputs[0].bytes, 3u);
  Write(dir.path() / "manifest.json", ManifestToJson(m));
  const Manifest back = ReadManifest(dir.path() / "manifest.json");
  EXPECT_EQ(ManifestToJson(back), ManifestToJson(m));
  EXPECT_NO_THROW(CheckInput(f));
  Write(f, "abd");
  EXPECT_THROW(CheckInput(f), StaleInputError);
}

TEST(Stages, ChainWritesManifestsAndIsDeterministic) {
  TempDir a, b;
  RunChain(SmallContext(a.path()), a.path());
  RunChain(SmallContext(b.path()), b.path());
  for (const char *f : {"gan/mapping.json", "gan/train_log.csv", "dec/decoded.jsonl",
                        "ev/report.json", "cl/codebook.json", "syn/world.json"}) {
    EXPECT_EQ(ReadFileText(a.path() / f), ReadFileText(b.path() / f)) << f;
  }
  const Manifest m = ReadManifest(a.path() / "gan" / "manifest.json");
  EXPECT_EQ(m.command, "train-gan");
  EXPECT_EQ(m.config_sha256, Sha256File(a.path() / "gan" / "config.resolved"));
  ASSERT_FALSE(m.outputs.empty());
  for (const auto &o : m.outputs) {
    EXPECT_EQ(o.sha256, Sha256File(a.path() / "gan" / o.path)) << o.path;
  }
  const nlohmann::json report =
      nlohmann::json::parse(ReadFileText(a.path() / "ev" / "report.json"));
  EXPECT_TRUE(report.contains("accuracy"));
  EXPECT_TRUE(report.contains("baselines"));
  EXPECT_DOUBLE_EQ(report["baselines"]["random_expected"].get<double>(), 0.25);
}

TEST(Stages, DifferentSeedChangesOutput) {
  TempDir a, b;
  RunSynth(At(SmallContext(a.path(), 1), a.path()));
  RunSynth(At(SmallContext(b.path(), 2), b.path()));
  EXPECT_NE(ReadFileText(a.path() / "world.json"), ReadFileText(b.path() / "world.json"));
}

TEST(Stages, StaleInputIsRejected) {
  TempDir dir;
  RunChain(SmallContext(dir.path()), dir.path());
  const fs::path clusters = dir.path() / "cl" / "clusters_test.jsonl";
  std::string text = ReadFileText(clusters);
  Write(clusters, text + "{\"id\":\"extra\",\"indices\":[1]}\n");
  EXPECT_THROW(RunDecode(At(SmallContext(dir.path()), dir.path() / "dec2"),
                         dir.path() / "gan" / "mapping.json", clusters),
               StaleInputError);
}

TEST(Stages, OutOfRangeClusterIsFormatError) {
  TempDir dir;
  RunChain(SmallContext(dir.path()), dir.path());
  const fs::path bad = dir.path() / "bad.jsonl";
  Write(bad, "{\"id\":\"x\",\"indices\":[1,99]}\n");
  EXPECT_THROW(RunDecode(At(SmallContext(dir.path()), dir.path() / "dec3"),
                         dir.path() / "gan" / "mapping.json", bad),
               FormatError);
}
