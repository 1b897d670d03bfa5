// pipeline/stages.cc
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

#include "phonegan/pipeline/stages.h"

#include <map>
#include <sstream>

#include <json.hpp>

#include "phonegan/audio2vec/features.h"
#include "phonegan/audio2vec/sae.h"
#include "phonegan/eval/lexicon.h"
#include "phonegan/eval/metrics.h"
#include "phonegan/eval/sweep.h"
#include "phonegan/pipeline/artifacts.h"
#include "phonegan/pipeline/manifest.h"

namespace phonegan {

namespace {

using nlohmann::json;

// Collects a stage's inputs up front and its outputs as they are written;
// Finish() adds config.resolved and manifest.json.
class StageOutput {
 public:
  StageOutput(const StageContext &ctx, std::string command)
      : ctx_(ctx), command_(std::move(command)) {
    fs::create_directories(ctx_.out);
  }

  void Input(const fs::path &path) { inputs_.push_back(CheckInput(path)); }

  void Write(const std::string &name, const std::string &text) {
    WriteFileText(ctx_.out / name, text);
    names_.push_back(name);
  }

  std::vector<std::string> Finish() {
    const std::string resolved = ResolvedConfigText(ctx_.config);
    WriteFileText(ctx_.out / "config.resolved", resolved);
    Manifest m;
    m.command = command_;
    m.seed = ctx_.config.seed;
    m.config_sha256 = Sha256Hex(resolved);
    m.inputs = inputs_;
    for (const auto &name : names_) {
      m.outputs.push_back(HashEntry(ctx_.out / name, name));
    }
    WriteFileText(ctx_.out / "manifest.json", ManifestToJson(m));
    std::vector<std::string> all = names_;
    all.push_back("config.resolved");
    all.push_back("manifest.json");
    return all;
  }

  void Log(const std::string &line) const {
    if (ctx_.log) ctx_.log(command_ + ": " + line);
  }

 private:
  const StageContext &ctx_;
  std::string command_;
  std::vector<ManifestEntry> inputs_;
  std::vector<std::string> names_;
};

json MatrixJson(const Tensor &m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.dim(0); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

std::vector<UtteranceFeatures> ToFeatures(const SynthCorpus &corpus,
                                          const std::string &prefix) {
  std::vector<UtteranceFeatures> out;
  for (const auto &u : corpus.utterances) {
    UtteranceFeatures f;
    f.id = prefix + u.id;
    f.labels = u.labels;
    if (!u.frames.empty()) {
      f.frames = u.frames;
      f.boundaries = u.boundaries;
    } else {
      f.frames = u.embeddings;
      for (std::size_t i = 0; i <= u.labels.size(); ++i) {
        f.boundaries.push_back(static_cast<int>(i));
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

std::string FeaturesText(const std::vector<UtteranceFeatures> &utts) {
  std::ostringstream ss;
  WriteFeatures(ss, utts);
  return ss.str();
}

std::vector<UtteranceFeatures> LoadFeatures(const fs::path &path) {
  std::istringstream is(ReadFileText(path));
  try {
    return ReadFeatures(is, path.string());
  } catch (const std::invalid_argument &e) {
    throw FormatError(path.string(), 0, "", e.what());
  }
}

std::vector<double> SegmentMean(const Tensor &segment) {
  const Eigen::RowVectorXd mean = segment.matrix().colwise().mean();
  return std::vector<double>(mean.data(), mean.data() + mean.size());
}

EmbeddedCorpus ToEmbeddedCorpus(const std::vector<UtteranceEmbeddings> &utts,
                                const std::string &source) {
  EmbeddedCorpus c;
  std::size_t rows = 0, dim = utts.front().embeddings.dim(1);
  bool labeled = true;
  for (const auto &u : utts) {
    rows += u.embeddings.dim(0);
    labeled = labeled && !u.labels.empty();
  }
  c.embeddings = Tensor({rows, dim});
  c.offsets.push_back(0);
  std::size_t r = 0;
  for (const auto &u : utts) {
    if (u.embeddings.dim(1) != dim) {
      throw FormatError(source, 0, "embeddings",
                        "utterance " + u.id + " has a different dimension");
    }
    c.ids.push_back(u.id);
    for (std::size_t i = 0; i < u.embeddings.dim(0); ++i, ++r) {
      auto src = u.embeddings.row(i);
      std::copy(src.begin(), src.end(), c.embeddings.row(r).begin());
    }
    if (labeled) c.labels.insert(c.labels.end(), u.labels.begin(), u.labels.end());
    c.offsets.push_back(r);
  }
  return c;
}

struct LoadedText {
  std::vector<std::vector<int>> sequences;
  std::vector<std::string> inventory;
  std::size_t skipped = 0;
};

std::vector<std::string> ReadInventory(const fs::path &path) {
  std::istringstream is(ReadFileText(path));
  std::vector<std::string> inventory;
  for (const std::string &line : ReadLines(is)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    inventory.push_back(line.substr(b, line.find_last_not_of(" \t\r") - b + 1));
  }
  return inventory;
}

LoadedText LoadText(const TextInputs &in) {
  std::vector<std::string> inventory;
  if (!in.phonemes.empty()) inventory = ReadInventory(in.phonemes);
  std::istringstream lex(ReadFileText(in.lexicon));
  Lexicon lexicon;
  try {
    lexicon = Lexicon::Read(lex, in.lexicon.string(), inventory);
  } catch (const std::invalid_argument &e) {
    throw FormatError(in.lexicon.string(), 0, "", e.what());
  }
  std::istringstream text(ReadFileText(in.text));
  const std::vector<std::string> sentences = ReadLines(text);
  TextConversion conv;
  try {
    conv = TextToPhonemes(sentences, lexicon);
  } catch (const std::invalid_argument &e) {
    throw FormatError(in.text.string(), 0, "", e.what());
  }
  return {std::move(conv.sequences), lexicon.inventory(), conv.skipped.size()};
}

void AlignLabels(
    const std::vector<ClusterIndexSequence> &clusters,
    const ReferenceLabels &ref, const fs::path &ref_path,
    std::vector<std::vector<int>> *labels) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < ref.ids.size(); ++i) by_id[ref.ids[i]] = i;
  labels->clear();
  for (const auto &c : clusters) {
    auto it = by_id.find(c.id);
    if (it == by_id.end()) {
      throw FormatError(ref_path.string(), 0, "id",
                        "no labels for utterance " + c.id);
    }
    const auto &lab = ref.labels[it->second];
    if (lab.size() != c.indices.size()) {
      throw FormatError(ref_path.string(), 0, "labels",
                        "utterance " + c.id + " has " +
                            std::to_string(lab.size()) + " labels for " +
                            std::to_string(c.indices.size()) + " segments");
    }
    labels->push_back(lab);
  }
}

void CheckClusterRange(const std::vector<ClusterIndexSequence> &clusters,
                       std::size_t k, const fs::path &path) {
  for (const auto &c : clusters) {
    for (int idx : c.indices) {
      if (static_cast<std::size_t>(idx) > k) {
        throw FormatError(path.string(), 0, "indices",
                          "cluster id " + std::to_string(idx) + " in " + c.id +
                              " exceeds k=" + std::to_string(k));
      }
    }
  }
}

std::vector<int> Flatten(const std::vector<std::vector<int>> &seqs) {
  std::vector<int> out;
  for (const auto &s : seqs) out.insert(out.end(), s.begin(), s.end());
  return out;
}

// Reference labels in the order of `ids`.
std::vector<int> LabelsFor(const std::vector<std::string> &ids,
                           const std::vector<std::size_t> &lengths,
                           const ReferenceLabels &ref,
                           const fs::path &ref_path) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < ref.ids.size(); ++i) by_id[ref.ids[i]] = i;
  std::vector<int> out;
  for (std::size_t u = 0; u < ids.size(); ++u) {
    auto it = by_id.find(ids[u]);
    if (it == by_id.end()) {
      throw FormatError(ref_path.string(), 0, "id",
                        "no labels for utterance " + ids[u]);
    }
    const auto &lab = ref.labels[it->second];
    if (lab.size() != lengths[u]) {
      throw FormatError(ref_path.string(), 0, "labels",
                        "utterance " + ids[u] + " has " +
                            std::to_string(lab.size()) + " labels for " +
                            std::to_string(lengths[u]) + " predictions");
    }
    out.insert(out.end(), lab.begin(), lab.end());
  }
  return out;
}

json ReportJson(const EvalReport &report, std::span<const int> ref,
                std::span<const int> baseline_ref, std::uint64_t seed) {
  json j = report.ToJson();
  const std::size_t L = report.num_phonemes;
  json b;
  b["random_expected"] = RandomBaselineExpected(L);
  b["random_empirical"] = BaselineRandom(ref, L, seed).accuracy;
  // Predict the modal label of `baseline_ref` on `ref`.
  const EvalReport mf = BaselineMostFrequent(baseline_ref, L);
  int modal = 0;
  std::uint64_t best = 0;
  for (std::size_t p = 0; p < L; ++p) {
    const std::uint64_t n = mf.count(static_cast<int>(p), static_cast<int>(p));
    if (n > best) {
      best = n;
      modal = static_cast<int>(p);
    }
  }
  const std::vector<int> guess(ref.size(), modal);
  b["most_frequent"] = PhonemeAccuracy(guess, ref);
  b["most_frequent_phoneme"] = modal;
  j["baselines"] = std::move(b);
  return j;
}

}  // namespace

ReferenceLabels ReadReferenceLabels(const fs::path &path) {
  const std::string file = path.string();
  ReferenceLabels out;
  std::istringstream is(ReadFileText(path));
  std::string text;
  int line = 0;
  while (std::getline(is, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error &e) {
      throw FormatError(file, line, "", std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw FormatError(file, line, "id", "missing string id");
    }
    if (!j.contains("labels") || !j["labels"].is_array()) {
      throw FormatError(file, line, "labels", "missing labels");
    }
    std::vector<int> labels;
    for (const json &v : j["labels"]) {
      if (!v.is_number_integer() || v.get<int>() < 0) {
        throw FormatError(file, line, "labels",
                          "expected non-negative integers");
      }
      labels.push_back(v.get<int>());
    }
    out.ids.push_back(j["id"].get<std::string>());
    out.labels.push_back(std::move(labels));
  }
  if (out.ids.empty()) throw FormatError(file, 0, "", "no labeled utterances");
  return out;
}

std::vector<std::string> RunSynth(const StageContext &ctx) {
  StageOutput out(ctx, "synth");
  const SynthSection &cfg = ctx.config.synth;
  const World world = GenWorld(cfg.world);
  const SynthCorpus train = GenCorpus(world, cfg.corpus);
  out.Log("world with " + std::to_string(world.num_phonemes()) +
          " phonemes, " + std::to_string(train.utterances.size()) +
          " training utterances");

  json w;
  w["num_phonemes"] = world.num_phonemes();
  w["modes_per_phoneme"] = world.modes();
  w["dim"] = world.dim();
  w["sigma"] = cfg.world.sigma;
  w["prototypes"] = MatrixJson(world.prototypes);
  w["bigram"] = MatrixJson(world.bigram);
  w["initial"] = world.initial;
  out.Write("world.json", w.dump() + "\n");
  out.Write("train.features.jsonl", FeaturesText(ToFeatures(train, "")));
  if (cfg.test_utterances > 0) {
    CorpusConfig tc = cfg.corpus;
    tc.num_utterances = cfg.test_utterances;
    tc.seed = StageSeed(ctx.config.seed, "synth.test");
    out.Write("test.features.jsonl",
              FeaturesText(ToFeatures(GenCorpus(world, tc), "test-")));
  }

  const std::vector<std::string> names = world.PhonemeNames();
  const auto &text =
      cfg.unrelated_text ? train.unrelated_text : train.matched_text;
  std::string sentences;
  for (const auto &s : text) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) sentences += ' ';
      sentences += names[static_cast<std::size_t>(s[i])];
    }
    sentences += '\n';
  }
  out.Write("text.txt", sentences);
  std::string lexicon, phonemes;
  for (const auto &n : names) {
    lexicon += n + "\t" + n + "\n";
    phonemes += n + "\n";
  }
  out.Write("lexicon.tsv", lexicon);
  out.Write("phonemes.txt", phonemes);
  return out.Finish();
}

std::vector<std::string> RunEmbed(const StageContext &ctx,
                                  const fs::path &features,
                                  const fs::path &features_test) {
  StageOutput out(ctx, "embed");
  out.Input(features);
  if (!features_test.empty()) out.Input(features_test);
  const Audio2VecSection &cfg = ctx.config.audio2vec;

  auto load = [&](const fs::path &path) {
    std::vector<UtteranceFeatures> utts = LoadFeatures(path);
    if (cfg.cmvn) {
      for (auto &u : utts) u = Cmvn(u);
    }
    return utts;
  };
  const std::vector<UtteranceFeatures> train = load(features);
  std::vector<UtteranceFeatures> test;
  if (!features_test.empty()) test = load(features_test);

  std::vector<Tensor> train_segments;
  for (const auto &u : train) {
    for (auto &s : SegmentFrames(u)) train_segments.push_back(std::move(s));
  }

  std::function<std::vector<double>(const Tensor &)> encode;
  SaeModel model;
  if (cfg.encoder == EncoderKind::kSae) {
    std::string log = "epoch,mse\n";
    std::ostringstream mse;
    mse.precision(10);
    const int every = std::max(1, cfg.sae.epochs / 10);
    SaeTrainResult trained = SaeTrain(
        train_segments, cfg.sae, [&](int epoch, double value) {
          mse.str("");
          mse << value;
          log += std::to_string(epoch) + "," + mse.str() + "\n";
          if (epoch % every == 0 || epoch == cfg.sae.epochs) {
            out.Log("epoch " + std::to_string(epoch) + " mse " + mse.str());
          }
        });
    model = std::move(trained.model);
    std::ostringstream ckpt;
    SaveSae(ckpt, model);
    out.Write("sae.json", ckpt.str());
    out.Write("sae_log.csv", log);
    encode = [&](const Tensor &seg) { return Encode(seg, model); };
  } else {
    encode = SegmentMean;
  }

  auto embed = [&](const std::vector<UtteranceFeatures> &utts) {
    std::vector<UtteranceEmbeddings> result;
    for (const auto &u : utts) {
      const std::vector<Tensor> segs = SegmentFrames(u);
      UtteranceEmbeddings e;
      e.id = u.id;
      e.labels = u.labels;
      for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::vector<double> v = encode(segs[i]);
        if (i == 0) e.embeddings = Tensor({segs.size(), v.size()});
        std::copy(v.begin(), v.end(), e.embeddings.row(i).begin());
      }
      result.push_back(std::move(e));
    }
    return result;
  };
  out.Write("embeddings.jsonl", EmbeddingsToJsonl(embed(train)));
  if (!test.empty()) {
    out.Write("embeddings_test.jsonl", EmbeddingsToJsonl(embed(test)));
  }
  out.Log(std::to_string(train_segments.size()) + " training segments");
  return out.Finish();
}

std::vector<std::string> RunCluster(const StageContext &ctx,
                                    const fs::path &embeddings,
                                    const fs::path &embeddings_test) {
  StageOutput out(ctx, "cluster");
  out.Input(embeddings);
  if (!embeddings_test.empty()) out.Input(embeddings_test);
  const EmbeddedCorpus train =
      ToEmbeddedCorpus(ReadEmbeddings(embeddings), embeddings.string());
  const KMeansConfig &kc = ctx.config.cluster;
  if (train.embeddings.dim(0) < kc.k) {
    throw FormatError(embeddings.string(), 0, "embeddings",
                      std::to_string(train.embeddings.dim(0)) +
                          " segments is fewer than k=" + std::to_string(kc.k));
  }
  const KMeansResult fit = KMeansFit(train.embeddings, kc);
  const Tensor train_points =
      kc.normalize ? L2Normalize(train.embeddings) : train.embeddings;
  const std::vector<int> idx = Assign(train_points, fit.codebook);
  out.Write("codebook.json", CodebookToJson(fit.codebook));
  out.Write("clusters.jsonl", ClustersToJsonl(ToClusterSequences(train, idx)));

  json report;
  report["k"] = kc.k;
  report["iterations"] = fit.iterations;
  report["empty_repairs"] = fit.empty_repairs;
  report["wcss"] = fit.wcss.empty() ? 0.0 : fit.wcss.back();
  if (!train.labels.empty()) report["purity_train"] = Purity(idx, train.labels);
  if (!embeddings_test.empty()) {
    const EmbeddedCorpus test = ToEmbeddedCorpus(
        ReadEmbeddings(embeddings_test), embeddings_test.string());
    const std::vector<int> tidx = Assign(
        kc.normalize ? L2Normalize(test.embeddings) : test.embeddings,
        fit.codebook);
    out.Write("clusters_test.jsonl",
              ClustersToJsonl(ToClusterSequences(test, tidx)));
    if (!test.labels.empty()) report["purity_test"] = Purity(tidx, test.labels);
  }
  out.Write("cluster_report.json", report.dump(2) + "\n");
  out.Log("k=" + std::to_string(kc.k) + " after " +
          std::to_string(fit.iterations) + " iterations");
  return out.Finish();
}

std::vector<std::string> RunTrainGan(const StageContext &ctx,
                                     const fs::path &clusters,
                                     const TextInputs &text,
                                     const fs::path &probe_labels) {
  StageOutput out(ctx, "train-gan");
  out.Input(clusters);
  out.Input(text.text);
  out.Input(text.lexicon);
  if (!text.phonemes.empty()) out.Input(text.phonemes);
  if (!probe_labels.empty()) out.Input(probe_labels);

  const std::vector<ClusterIndexSequence> seqs = ReadClusters(clusters);
  const std::size_t k = ctx.config.cluster.k;
  CheckClusterRange(seqs, k, clusters);
  const LoadedText phon = LoadText(text);
  if (phon.skipped > 0) {
    out.Log("skipped " + std::to_string(phon.skipped) +
            " sentences with out-of-lexicon words");
  }
  std::vector<std::vector<int>> probe_ref;
  ProbeSet probe;
  const ProbeSet *probe_ptr = nullptr;
  if (!probe_labels.empty()) {
    AlignLabels(seqs, ReadReferenceLabels(probe_labels), probe_labels,
                    &probe_ref);
    probe = {seqs, probe_ref};
    probe_ptr = &probe;
  }
  const GanConfig &gc = ctx.config.ganmap;
  const GanResult result =
      TrainGan(seqs, phon.sequences, k, phon.inventory.size(), gc, probe_ptr);
  out.Write("mapping.json", MappingToJson({result.table, phon.inventory}));
  std::ostringstream log;
  WriteTrainLogCsv(log, result.log);
  out.Write("train_log.csv", log.str());
  out.Log(std::to_string(result.iterations_run) + " generator iterations");
  return out.Finish();
}

std::vector<std::string> RunDecode(const StageContext &ctx,
                                   const fs::path &mapping,
                                   const fs::path &clusters) {
  StageOutput out(ctx, "decode");
  out.Input(mapping);
  out.Input(clusters);
  const Mapping m = ReadMapping(mapping);
  const std::vector<ClusterIndexSequence> seqs = ReadClusters(clusters);
  CheckClusterRange(seqs, m.table.num_clusters(), clusters);
  std::vector<DecodedUtterance> decoded;
  for (const auto &s : seqs) decoded.push_back({s.id, Decode(s.indices, m.table)});
  out.Write("decoded.jsonl", DecodedToJsonl(decoded));
  return out.Finish();
}

std::vector<std::string> RunEval(const StageContext &ctx,
                                 const fs::path &decoded,
                                 const fs::path &reference,
                                 const fs::path &clusters,
                                 const fs::path &train_reference,
                                 const fs::path &phonemes) {
  StageOutput out(ctx, "eval");
  out.Input(decoded);
  out.Input(reference);
  if (!clusters.empty()) out.Input(clusters);
  if (!train_reference.empty()) out.Input(train_reference);
  if (!phonemes.empty()) out.Input(phonemes);

  const std::vector<DecodedUtterance> pred = ReadDecoded(decoded);
  std::vector<std::string> ids;
  std::vector<std::size_t> lengths;
  std::vector<int> flat_pred;
  for (const auto &p : pred) {
    ids.push_back(p.id);
    lengths.push_back(p.phonemes.size());
    flat_pred.insert(flat_pred.end(), p.phonemes.begin(), p.phonemes.end());
  }
  const std::vector<int> ref =
      LabelsFor(ids, lengths, ReadReferenceLabels(reference), reference);
  int max_id = 0;
  for (int v : flat_pred) max_id = std::max(max_id, v);
  for (int v : ref) max_id = std::max(max_id, v);
  std::size_t L = static_cast<std::size_t>(max_id) + 1;
  if (!phonemes.empty()) {
    const std::size_t n = ReadInventory(phonemes).size();
    if (n < L) {
      throw FormatError(phonemes.string(), 0, "",
                        "phoneme id " + std::to_string(max_id) +
                            " outside an inventory of " + std::to_string(n));
    }
    L = n;
  }
  const EvalReport report = Evaluate(flat_pred, ref, L);
  std::vector<int> baseline_ref = ref;
  if (!train_reference.empty()) {
    baseline_ref = Flatten(ReadReferenceLabels(train_reference).labels);
  }
  json j = ReportJson(report, ref, baseline_ref,
                      StageSeed(ctx.config.seed, "eval.random-baseline"));
  if (!clusters.empty()) {
    const std::vector<ClusterIndexSequence> seqs = ReadClusters(clusters);
    std::vector<std::string> cids;
    std::vector<std::size_t> clens;
    std::vector<int> flat_idx;
    for (const auto &s : seqs) {
      cids.push_back(s.id);
      clens.push_back(s.indices.size());
      flat_idx.insert(flat_idx.end(), s.indices.begin(), s.indices.end());
    }
    const std::vector<int> cref =
        LabelsFor(cids, clens, ReadReferenceLabels(reference), reference);
    j["purity"] = Purity(flat_idx, cref);
  }
  out.Write("report.json", j.dump(2) + "\n");
  out.Log("accuracy " + FormatDouble(report.accuracy));
  return out.Finish();
}

std::vector<std::string> RunSweep(const StageContext &ctx,
                                  const fs::path &embeddings,
                                  const fs::path &embeddings_test,
                                  const TextInputs &text) {
  StageOutput out(ctx, "sweep");
  out.Input(embeddings);
  if (!embeddings_test.empty()) out.Input(embeddings_test);
  out.Input(text.text);
  out.Input(text.lexicon);
  if (!text.phonemes.empty()) out.Input(text.phonemes);

  const EmbeddedCorpus train =
      ToEmbeddedCorpus(ReadEmbeddings(embeddings), embeddings.string());
  EmbeddedCorpus test;
  if (!embeddings_test.empty()) {
    test = ToEmbeddedCorpus(ReadEmbeddings(embeddings_test),
                            embeddings_test.string());
  }
  const LoadedText phon = LoadText(text);
  SweepConfig sc;
  sc.kmeans = ctx.config.cluster;
  sc.gan = ctx.config.ganmap;
  sc.seed = StageSeed(ctx.config.seed, "sweep");
  sc.jobs = ctx.jobs;
  const auto &ks = ctx.config.eval.sweep_ks;
  for (std::size_t k : ks) {
    if (k > train.embeddings.dim(0)) {
      throw FormatError(embeddings.string(), 0, "embeddings",
                        "fewer segments than k=" + std::to_string(k));
    }
  }
  const std::vector<SweepRow> rows = SweepClusters(
      ks, train, test, phon.sequences, phon.inventory.size(), sc);
  std::ostringstream csv;
  WriteSweepCsv(csv, rows);
  out.Write("sweep.csv", csv.str());
  out.Log(std::to_string(rows.size()) + " rows");
  return out.Finish();
}

std::vector<std::string> RunEnsemble(const StageContext &ctx,
                                     const std::vector<fs::path> &runs,
                                     const fs::path &clusters,
                                     const fs::path &reference) {
  StageOutput out(ctx, "ensemble");
  if (runs.empty()) throw std::invalid_argument("ensemble: no run directories");
  std::vector<fs::path> mappings;
  for (const auto &r : runs) {
    mappings.push_back(r / "mapping.json");
    out.Input(mappings.back());
  }
  out.Input(clusters);
  if (!reference.empty()) out.Input(reference);

  const std::vector<ClusterIndexSequence> seqs = ReadClusters(clusters);
  std::vector<std::vector<int>> predictions;
  std::vector<Tensor> probabilities;
  std::size_t L = 0;
  for (const auto &path : mappings) {
    const Mapping m = ReadMapping(path);
    if (L == 0) L = m.table.num_phonemes();
    if (m.table.num_phonemes() != L) {
      throw FormatError(path.string(), 0, "l", "phoneme counts differ");
    }
    CheckClusterRange(seqs, m.table.num_clusters(), clusters);
    std::vector<int> pred;
    std::vector<std::vector<double>> rows;
    for (const auto &s : seqs) {
      const std::vector<int> d = Decode(s.indices, m.table);
      pred.insert(pred.end(), d.begin(), d.end());
      for (int c : s.indices) rows.push_back(Softmax(m.table.Row(c)));
    }
    Tensor p({rows.size(), L});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::copy(rows[i].begin(), rows[i].end(), p.row(i).begin());
    }
    predictions.push_back(std::move(pred));
    probabilities.push_back(std::move(p));
  }
  const std::vector<int> voted = EnsembleVote(predictions, probabilities);
  std::vector<DecodedUtterance> decoded;
  std::size_t pos = 0;
  for (const auto &s : seqs) {
    decoded.push_back({s.id, std::vector<int>(voted.begin() + pos,
                                              voted.begin() + pos +
                                                  s.indices.size())});
    pos += s.indices.size();
  }
  out.Write("decoded.jsonl", DecodedToJsonl(decoded));
  if (!reference.empty()) {
    std::vector<std::string> ids;
    std::vector<std::size_t> lengths;
    for (const auto &s : seqs) {
      ids.push_back(s.id);
      lengths.push_back(s.indices.size());
    }
    const std::vector<int> ref =
        LabelsFor(ids, lengths, ReadReferenceLabels(reference), reference);
    json j = Evaluate(voted, ref, L).ToJson();
    json members = json::array();
    for (std::size_t m = 0; m < predictions.size(); ++m) {
      members.push_back(PhonemeAccuracy(predictions[m], ref));
    }
    j["member_accuracy"] = std::move(members);
    out.Write("report.json", j.dump(2) + "\n");
    out.Log("voted accuracy " + FormatDouble(j["accuracy"].get<double>()));
  }
  return out.Finish();
}

}  // namespace phonegan
