// pipeline/config.cc
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

#include "phonegan/pipeline/config.h"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "phonegan/numcore/rng.h"

namespace phonegan {

namespace {

struct Entry {
  std::function<void(PipelineConfig &, const std::string &)> set;
  std::function<std::string(const PipelineConfig &)> get;
};

[[noreturn]] void BadValue(const std::string &value, const char *expected) {
  throw std::invalid_argument("expected " + std::string(expected) + ", got '" +
                              value + "'");
}

template <typename T>
T ParseInteger(const std::string &value) {
  T out{};
  const char *end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(value, "an integer");
  return out;
}

double ParseReal(const std::string &value) {
  double out = 0.0;
  const char *end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) BadValue(value, "a number");
  return out;
}

bool ParseBool(const std::string &value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  BadValue(value, "true or false");
}

std::vector<std::size_t> ParseSizeList(const std::string &value) {
  std::vector<std::size_t> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(ParseInteger<std::size_t>(item));
  }
  if (out.empty()) BadValue(value, "a comma-separated list");
  return out;
}

std::string Real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string Bool(bool v) { return v ? "true" : "false"; }

std::string SizeList(const std::vector<std::size_t> &v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

template <typename T, typename Get>
Entry IntegerEntry(Get field) {
  return {[field](PipelineConfig &c, const std::string &v) {
            field(c) = ParseInteger<T>(v);
          },
          [field](const PipelineConfig &c) {
            return std::to_string(field(c));
          }};
}

template <typename Get>
Entry RealEntry(Get field) {
  return {[field](PipelineConfig &c, const std::string &v) {
            field(c) = ParseReal(v);
          },
          [field](const PipelineConfig &c) {
            return Real(field(c));
          }};
}

template <typename Get>
Entry BoolEntry(Get field) {
  return {[field](PipelineConfig &c, const std::string &v) {
            field(c) = ParseBool(v);
          },
          [field](const PipelineConfig &c) {
            return Bool(field(c));
          }};
}

template <typename Get>
Entry SizeListEntry(Get field) {
  return {[field](PipelineConfig &c, const std::string &v) {
            field(c) = ParseSizeList(v);
          },
          [field](const PipelineConfig &c) {
            return SizeList(field(c));
          }};
}

const std::map<std::string, Entry> &Registry() {
  using C = PipelineConfig;
  static const std::map<std::string, Entry> registry = [] {
    std::map<std::string, Entry> r;
    r["seed"] = IntegerEntry<std::uint64_t>([](auto &c) -> auto & { return c.seed; });

    // synth
    r["synth.num_phonemes"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.world.num_phonemes; });
    r["synth.modes_per_phoneme"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.world.modes_per_phoneme; });
    r["synth.dim"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.world.dim; });
    r["synth.sigma"] =
        RealEntry([](auto &c) -> auto & { return c.synth.world.sigma; });
    r["synth.min_proto_gap"] =
        RealEntry([](auto &c) -> auto & { return c.synth.world.min_proto_gap; });
    r["synth.proto_range"] =
        RealEntry([](auto &c) -> auto & { return c.synth.world.proto_range; });
    r["synth.bigram_concentration"] = RealEntry(
        [](auto &c) -> auto & { return c.synth.world.bigram_concentration; });
    r["synth.bigram_floor"] =
        RealEntry([](auto &c) -> auto & { return c.synth.world.bigram_floor; });
    r["synth.bigram_permutations"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.world.bigram_permutations; });
    r["synth.max_rejections"] = IntegerEntry<int>(
        [](auto &c) -> auto & { return c.synth.world.max_rejections; });
    r["synth.train_utterances"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.num_utterances; });
    r["synth.test_utterances"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.test_utterances; });
    r["synth.min_length"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.min_length; });
    r["synth.max_length"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.max_length; });
    r["synth.text_sentences"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.num_unrelated_sentences; });
    r["synth.unrelated_text"] =
        BoolEntry([](auto &c) -> auto & { return c.synth.unrelated_text; });
    r["synth.frames"] =
        BoolEntry([](auto &c) -> auto & { return c.synth.corpus.frames.enabled; });
    r["synth.min_frames"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.frames.min_frames; });
    r["synth.max_frames"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.frames.max_frames; });
    r["synth.silence_frames"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.synth.corpus.frames.silence_frames; });

    // audio2vec
    r["audio2vec.encoder"] = {
        [](C &c, const std::string &v) {
          if (v == "sae") {
            c.audio2vec.encoder = EncoderKind::kSae;
          } else if (v == "mean") {
            c.audio2vec.encoder = EncoderKind::kMean;
          } else {
            BadValue(v, "sae or mean");
          }
        },
        [](const C &c) {
          return std::string(c.audio2vec.encoder == EncoderKind::kSae ? "sae"
                                                                      : "mean");
        }};
    r["audio2vec.cmvn"] =
        BoolEntry([](auto &c) -> auto & { return c.audio2vec.cmvn; });
    r["audio2vec.hidden"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.audio2vec.sae.hidden; });
    r["audio2vec.epochs"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.audio2vec.sae.epochs; });
    r["audio2vec.lr"] = RealEntry([](auto &c) -> auto & { return c.audio2vec.sae.lr; });
    r["audio2vec.batch"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.audio2vec.sae.batch; });
    r["audio2vec.reverse_target"] =
        BoolEntry([](auto &c) -> auto & { return c.audio2vec.sae.reverse_target; });
    r["audio2vec.beta1"] =
        RealEntry([](auto &c) -> auto & { return c.audio2vec.sae.adam.beta1; });
    r["audio2vec.beta2"] =
        RealEntry([](auto &c) -> auto & { return c.audio2vec.sae.adam.beta2; });
    r["audio2vec.epsilon"] =
        RealEntry([](auto &c) -> auto & { return c.audio2vec.sae.adam.epsilon; });

    // cluster
    r["cluster.k"] =
        IntegerEntry<std::size_t>([](auto &c) -> auto & { return c.cluster.k; });
    r["cluster.max_iter"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.cluster.max_iter; });
    r["cluster.tol"] = RealEntry([](auto &c) -> auto & { return c.cluster.tol; });
    r["cluster.normalize"] =
        BoolEntry([](auto &c) -> auto & { return c.cluster.normalize; });

    // ganmap
    r["ganmap.mode"] = {
        [](C &c, const std::string &v) { c.ganmap.mode = ParseMode(v); },
        [](const C &c) { return std::string(ModeName(c.ganmap.mode)); }};
    r["ganmap.inv_temp"] =
        RealEntry([](auto &c) -> auto & { return c.ganmap.inv_temp; });
    r["ganmap.lr_g"] = RealEntry([](auto &c) -> auto & { return c.ganmap.lr_g; });
    r["ganmap.lr_d"] = RealEntry([](auto &c) -> auto & { return c.ganmap.lr_d; });
    r["ganmap.d_steps_per_g"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.ganmap.d_steps_per_g; });
    r["ganmap.gp_lambda"] =
        RealEntry([](auto &c) -> auto & { return c.ganmap.gp_lambda; });
    r["ganmap.batch"] =
        IntegerEntry<std::size_t>([](auto &c) -> auto & { return c.ganmap.batch; });
    r["ganmap.seq_len"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.ganmap.seq_len; });
    r["ganmap.iterations"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.ganmap.iterations; });
    r["ganmap.e_init_stddev"] =
        RealEntry([](auto &c) -> auto & { return c.ganmap.e_init_stddev; });
    r["ganmap.branch_widths"] = SizeListEntry(
        [](auto &c) -> auto & { return c.ganmap.disc.branch_widths; });
    r["ganmap.branch_channels"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.ganmap.disc.branch_channels; });
    r["ganmap.conv2_width"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.ganmap.disc.conv2_width; });
    r["ganmap.conv2_channels"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.ganmap.disc.conv2_channels; });
    r["ganmap.leaky_slope"] =
        RealEntry([](auto &c) -> auto & { return c.ganmap.disc.leaky_slope; });
    r["ganmap.beta1"] = {
        [](C &c, const std::string &v) {
          c.ganmap.adam.beta1 = c.ganmap.g_adam.beta1 = ParseReal(v);
        },
        [](const C &c) { return Real(c.ganmap.adam.beta1); }};
    r["ganmap.beta2"] = {
        [](C &c, const std::string &v) {
          c.ganmap.adam.beta2 = c.ganmap.g_adam.beta2 = ParseReal(v);
        },
        [](const C &c) { return Real(c.ganmap.adam.beta2); }};
    r["ganmap.epsilon"] = {
        [](C &c, const std::string &v) {
          c.ganmap.adam.epsilon = c.ganmap.g_adam.epsilon = ParseReal(v);
        },
        [](const C &c) { return Real(c.ganmap.adam.epsilon); }};
    r["ganmap.g_tensor_second_moment"] = BoolEntry(
        [](auto &c) -> auto & { return c.ganmap.g_adam.tensor_second_moment; });
    r["ganmap.log_every"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.ganmap.log_every; });
    r["ganmap.plateau_window"] =
        IntegerEntry<int>([](auto &c) -> auto & { return c.ganmap.plateau_window; });
    r["ganmap.plateau_tol"] =
        RealEntry([](auto &c) -> auto & { return c.ganmap.plateau_tol; });

    // eval
    r["eval.sweep_ks"] =
        SizeListEntry([](auto &c) -> auto & { return c.eval.sweep_ks; });
    r["eval.ensemble_size"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.eval.ensemble_size; });
    r["eval.supervised_hidden"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.eval.supervised.hidden; });
    r["eval.supervised_epochs"] = IntegerEntry<int>(
        [](auto &c) -> auto & { return c.eval.supervised.epochs; });
    r["eval.supervised_lr"] =
        RealEntry([](auto &c) -> auto & { return c.eval.supervised.lr; });
    r["eval.supervised_batch"] = IntegerEntry<std::size_t>(
        [](auto &c) -> auto & { return c.eval.supervised.batch; });
    return r;
  }();
  return registry;
}

const Entry &Lookup(const std::string &key) {
  const auto &reg = Registry();
  auto it = reg.find(key);
  if (it == reg.end()) {
    throw ConfigError("unknown config key '" + key + "'", key, "", 0);
  }
  return it->second;
}

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void ApplyLine(PipelineConfig &config, const std::string &raw,
               const std::string &source, int line) {
  const std::string text = Trim(raw.substr(0, raw.find('#')));
  if (text.empty()) return;
  const auto eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("expected key=value, got '" + text + "'", "", source,
                      line);
  }
  const std::string key = Trim(text.substr(0, eq));
  const std::string value = Trim(text.substr(eq + 1));
  try {
    SetConfigValue(config, key, value);
  } catch (const ConfigError &e) {
    throw ConfigError(e.what(), key, source, line);
  }
}

}  // namespace

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto &[k, e] : Registry()) keys.push_back(k);
  return keys;
}

void SetConfigValue(PipelineConfig &config, const std::string &key,
                    const std::string &value) {
  const Entry &entry = Lookup(key);
  try {
    entry.set(config, value);
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    throw ConfigError(key + ": " + e.what(), key, "", 0);
  }
}

std::string GetConfigValue(const PipelineConfig &config,
                           const std::string &key) {
  return Lookup(key).get(config);
}

void ApplyConfigText(PipelineConfig &config, const std::string &text,
                     const std::string &source) {
  std::istringstream is(text);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) ApplyLine(config, raw, source, ++line);
}

void ApplyOverrides(PipelineConfig &config,
                    const std::vector<std::string> &overrides) {
  for (const auto &o : overrides) ApplyLine(config, o, "command line", 0);
}

std::string ResolvedConfigText(const PipelineConfig &config) {
  std::string out;
  for (const auto &[key, entry] : Registry()) {
    out += key + "=" + entry.get(config) + "\n";
  }
  return out;
}

std::uint64_t StageSeed(std::uint64_t root, const std::string &stage) {
  return Rng(root).Derive(stage).seed();
}

void DeriveStageSeeds(PipelineConfig &config) {
  const std::uint64_t root = config.seed;
  config.synth.world.seed = StageSeed(root, "synth.world");
  config.synth.corpus.seed = StageSeed(root, "synth.corpus");
  config.audio2vec.sae.seed = StageSeed(root, "audio2vec");
  config.cluster.seed = StageSeed(root, "cluster");
  config.ganmap.seed = StageSeed(root, "ganmap");
  config.eval.supervised.seed = StageSeed(root, "eval.supervised");
}

}  // namespace phonegan
