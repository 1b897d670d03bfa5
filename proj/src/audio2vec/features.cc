// audio2vec/features.cc
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


#include "phonegan/audio2vec/features.h"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace phonegan {

void UtteranceFeatures::Validate() const {
  const std::string where = "utterance '" + id + "': ";
  if (frames.rank() != 2) throw std::invalid_argument(where + "frames must be a matrix");
  if (boundaries.size() < 2) {
    throw std::invalid_argument(where + "need at least two boundaries");
  }
  const long t = static_cast<long>(num_frames());
  if (boundaries.front() < 0 || boundaries.back() > t) {
    throw std::invalid_argument(where + "boundaries outside [0, " +
                                std::to_string(t) + "]");
  }
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      throw std::invalid_argument(where + "boundaries must strictly increase");
    }
  }
  if (!labels.empty() && labels.size() != num_segments()) {
    throw std::invalid_argument(where + "labels count " +
                                std::to_string(labels.size()) +
                                " differs from segment count " +
                                std::to_string(num_segments()));
  }
}

UtteranceFeatures Cmvn(const UtteranceFeatures &utt) {
  const std::size_t t = utt.num_frames();
  if (t < 2) {
    throw std::invalid_argument("cmvn: utterance '" + utt.id +
                                "' has fewer than 2 frames");
  }
  UtteranceFeatures out = utt;
  auto x = out.frames.matrix();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto col = x.col(j);
    if ((col.array() == col(0)).all()) {
      col.setZero();
      continue;
    }
    const double mean = col.mean();
    col.array() -= mean;
    const double var = col.squaredNorm() / static_cast<double>(t);
    if (var > 0.0) col /= std::sqrt(var);
  }
  return out;
}

std::vector<Tensor> SegmentFrames(const UtteranceFeatures &utt) {
  utt.Validate();
  const std::size_t dim = utt.frames.dim(1);
  std::vector<Tensor> out;
  out.reserve(utt.num_segments());
  for (std::size_t s = 0; s + 1 < utt.boundaries.size(); ++s) {
    const auto b0 = static_cast<std::size_t>(utt.boundaries[s]);
    const auto b1 = static_cast<std::size_t>(utt.boundaries[s + 1]);
    Tensor seg({b1 - b0, dim});
    seg.matrix() = utt.frames.matrix().middleRows(b0, b1 - b0);
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<UtteranceFeatures> ReadFeatures(std::istream &is,
                                            const std::string &source) {
  std::vector<UtteranceFeatures> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      UtteranceFeatures u;
      u.id = j.at("id").get<std::string>();
      const auto &frames = j.at("frames");
      const std::size_t t = frames.size();
      const std::size_t d = t == 0 ? 0 : frames.at(0).size();
      u.frames = Tensor({t, d});
      for (std::size_t i = 0; i < t; ++i) {
        if (frames[i].size() != d) {
          throw std::invalid_argument("field 'frames': ragged row " +
                                      std::to_string(i));
        }
        for (std::size_t k = 0; k < d; ++k) {
          u.frames.at(i, k) = frames[i][k].get<double>();
        }
      }
      u.boundaries = j.at("boundaries").get<std::vector<int>>();
      if (j.contains("labels")) u.labels = j["labels"].get<std::vector<int>>();
      u.Validate();
      out.push_back(std::move(u));
    } catch (const nlohmann::json::exception &e) {
      throw std::invalid_argument(where + e.what());
    } catch (const std::invalid_argument &e) {
      throw std::invalid_argument(where + e.what());
    }
  }
  return out;
}

void WriteFeatures(std::ostream &os,
                   const std::vector<UtteranceFeatures> &utts) {
  for (const auto &u : utts) {
    nlohmann::json j;
    j["id"] = u.id;
    auto frames = nlohmann::json::array();
    for (std::size_t i = 0; i < u.num_frames(); ++i) {
      auto r = u.frames.row(i);
      frames.push_back(std::vector<double>(r.begin(), r.end()));
    }
    j["frames"] = std::move(frames);
    j["boundaries"] = u.boundaries;
    if (!u.labels.empty()) j["labels"] = u.labels;
    os << j.dump() << '\n';
  }
}

}  // namespace phonegan
