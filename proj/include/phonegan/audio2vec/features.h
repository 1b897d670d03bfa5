// phonegan/audio2vec/features.h
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


#ifndef PHONEGAN_AUDIO2VEC_FEATURES_H_
#define PHONEGAN_AUDIO2VEC_FEATURES_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "phonegan/numcore/tensor.h"

namespace phonegan {

// One utterance: T x d frame matrix and the M + 1 boundaries of its M
// segments. Frames before boundaries.front() and from boundaries.back()
// on are silence.
struct UtteranceFeatures {
  std::string id;
  Tensor frames;
  std::vector<int> boundaries;
  std::vector<int> labels;  // optional reference labels, one per segment

  std::size_t num_frames() const { return frames.empty() ? 0 : frames.dim(0); }
  std::size_t num_segments() const {
    return boundaries.empty() ? 0 : boundaries.size() - 1;
  }
  // Throws std::invalid_argument naming the utterance on a violated
  // invariant.
  void Validate() const;
};

// Per-utterance mean and variance normalization of each frame dimension.
// Constant columns become zero.
UtteranceFeatures Cmvn(const UtteranceFeatures &utt);

// Segment frame matrices in order, silence excluded.
std::vector<Tensor> SegmentFrames(const UtteranceFeatures &utt);

// JSON lines: {"id", "frames": [[...], ...], "boundaries": [...],
// "labels": [...]} with labels optional.
std::vector<UtteranceFeatures> ReadFeatures(std::istream &is,
                                            const std::string &source);
void WriteFeatures(std::ostream &os, const std::vector<UtteranceFeatures> &utts);

}  // namespace phonegan

#endif  // PHONEGAN_AUDIO2VEC_FEATURES_H_
