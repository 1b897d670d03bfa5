// eval/lexicon.cc
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


#include "phonegan/eval/lexicon.h"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace phonegan {

namespace {

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

Lexicon::Lexicon(std::vector<std::string> inventory)
    : fixed_inventory_(true), inventory_(std::move(inventory)) {
  for (std::size_t i = 0; i < inventory_.size(); ++i) {
    if (!phoneme_ids_.emplace(inventory_[i], static_cast<int>(i)).second) {
      throw std::invalid_argument("lexicon: duplicate phoneme name '" +
                                  inventory_[i] + "'");
    }
  }
}

int Lexicon::InternPhoneme(const std::string &name) {
  auto it = phoneme_ids_.find(name);
  if (it != phoneme_ids_.end()) return it->second;
  if (fixed_inventory_) {
    throw std::invalid_argument("lexicon: phoneme '" + name +
                                "' is not in the inventory");
  }
  const int id = static_cast<int>(inventory_.size());
  inventory_.push_back(name);
  phoneme_ids_.emplace(name, id);
  return id;
}

void Lexicon::Add(const std::string &word,
                  const std::vector<std::string> &phonemes) {
  if (word.empty()) throw std::invalid_argument("lexicon: empty word");
  if (phonemes.empty()) {
    throw std::invalid_argument("lexicon: word '" + word +
                                "' has no pronunciation");
  }
  std::vector<int> ids;
  ids.reserve(phonemes.size());
  for (const auto &p : phonemes) ids.push_back(InternPhoneme(p));
  words_[Lower(word)] = std::move(ids);
}

Lexicon Lexicon::Read(std::istream &is, const std::string &source,
                      std::vector<std::string> inventory) {
  Lexicon lex = inventory.empty() ? Lexicon() : Lexicon(std::move(inventory));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": expected word<TAB>phonemes");
    }
    std::istringstream ps(line.substr(tab + 1));
    std::vector<std::string> phonemes;
    for (std::string p; ps >> p;) phonemes.push_back(p);
    try {
      lex.Add(line.substr(0, tab), phonemes);
    } catch (const std::invalid_argument &e) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) +
                                  ": " + e.what());
    }
  }
  return lex;
}

const std::vector<int> *Lexicon::Find(const std::string &word) const {
  auto it = words_.find(Lower(word));
  return it == words_.end() ? nullptr : &it->second;
}

int Lexicon::PhonemeId(const std::string &name) const {
  auto it = phoneme_ids_.find(name);
  return it == phoneme_ids_.end() ? -1 : it->second;
}

TextConversion TextToPhonemes(std::span<const std::string> sentences,
                              const Lexicon &lexicon) {
  TextConversion out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::istringstream ws(sentences[i]);
    std::vector<int> seq;
    bool ok = true;
    for (std::string w; ws >> w;) {
      const std::vector<int> *pron = lexicon.Find(w);
      if (!pron) {
        ok = false;
        break;
      }
      seq.insert(seq.end(), pron->begin(), pron->end());
    }
    if (ok && !seq.empty()) {
      out.sequences.push_back(std::move(seq));
    } else {
      out.skipped.push_back(i);
    }
  }
  if (out.sequences.empty()) {
    throw std::invalid_argument("text_to_phonemes: no sentence is fully "
                                "covered by the lexicon");
  }
  return out;
}

std::vector<std::string> ReadLines(std::istream &is) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace phonegan
