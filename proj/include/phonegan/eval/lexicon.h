// phonegan/eval/lexicon.h
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


// Word pronunciations and text-to-phoneme conversion.

#ifndef PHONEGAN_EVAL_LEXICON_H_
#define PHONEGAN_EVAL_LEXICON_H_

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace phonegan {

class Lexicon {
 public:
  Lexicon() = default;
  // Phoneme inventory fixed in advance; entries must use these names.
  explicit Lexicon(std::vector<std::string> inventory);

  // Lines `word<TAB>PH1 PH2 ...`. Without a fixed inventory, phoneme ids
  // are assigned in order of first appearance. Blank lines are skipped.
  static Lexicon Read(std::istream &is, const std::string &source,
                      std::vector<std::string> inventory = {});

  void Add(const std::string &word, const std::vector<std::string> &phonemes);

  const std::vector<std::string> &inventory() const { return inventory_; }
  std::size_t num_phonemes() const { return inventory_.size(); }
  // nullptr when the (lowercased) word is unknown.
  const std::vector<int> *Find(const std::string &word) const;
  int PhonemeId(const std::string &name) const;  // -1 when unknown

 private:
  int InternPhoneme(const std::string &name);

  bool fixed_inventory_ = false;
  std::vector<std::string> inventory_;
  std::map<std::string, int> phoneme_ids_;
  std::map<std::string, std::vector<int>> words_;
};

struct TextConversion {
  std::vector<std::vector<int>> sequences;
  std::vector<std::size_t> skipped;  // indices of sentences dropped
};

// Lowercases, splits on whitespace and concatenates pronunciations.
// Sentences with an unknown word (or no words) are skipped. Throws
// std::invalid_argument when nothing survives.
TextConversion TextToPhonemes(std::span<const std::string> sentences,
                              const Lexicon &lexicon);

std::vector<std::string> ReadLines(std::istream &is);

}  // namespace phonegan

#endif  // PHONEGAN_EVAL_LEXICON_H_
