// Copyright 2026 The dare Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dare/synthetic.h"

#include <sstream>

#include "dare/error.h"

namespace dare {
namespace {

// Zipf(1) choice over `options`.
const std::string& pick(const std::vector<std::string>& options, Rng& rng) {
  std::vector<double> weights(options.size());
  for (size_t i = 0; i < options.size(); ++i)
    weights[i] = 1.0 / static_cast<double>(i + 1);
  return options[rng.categorical(weights)];
}

void append_words(TokenSequence& out, const std::string& phrase) {
  std::istringstream in(phrase);
  for (std::string word; in >> word;) out.push_back(word);
}

const std::vector<std::string> kOpeners = {
    "", "", "in this study ,", "we found that", "these results suggest that",
    "clinically ,", "in rats ,", "notably ,", "overall ,", "in patients ,",
    "our data indicate that", "in a retrospective cohort ,",
    "as shown in table 2 ,", "in the present case ,"};

const std::vector<std::string> kAModifiers = {
    "", "", "", "therapy", "treatment", "exposure", "administration",
    "use", "infusion", "at high doses", "overdose", "withdrawal"};

const std::vector<std::string> kBModifiers = {
    "", "", "", "in adults", "in children", "in rats", "in elderly patients",
    "in some cases", "in two patients", "in mice", "in healthy volunteers"};

const std::vector<std::string> kClosers = {
    ".", ".", "in a dose dependent manner .", "after long term use .",
    "within two weeks .", "in most patients .", "as previously reported .",
    "during the follow up period .", "( p < 0.05 ) .", "in this population ."};

const std::vector<std::string> kMultiStems = {
    "increased",  "decreased",   "inhibited",  "enhanced",   "blocked",
    "potentiated", "reduced",    "elevated",   "displaced",  "metabolized",
    "antagonized", "accelerated", "delayed",   "modulated",  "suppressed",
    "activated",  "stabilized",  "cleared",    "bound",      "absorbed",
    "altered",    "prolonged",   "shortened",  "doubled",    "halved",
    "competed with", "interfered with", "interacted with", "combined with",
    "coadministered with", "compared with", "measured with", "listed with",
    "given with", "studied with", "described with"};

}  // namespace

TemplateGrammar TemplateGrammar::binary() {
  TemplateGrammar g;
  g.schema_.relation_types = {"induce"};
  g.cues_.push_back(CueSet{
      {"induced", "caused", "led to", "triggered", "resulted in", "provoked",
       "was associated with the development of", "precipitated", "produced",
       "evoked", "gave rise to", "was responsible for", "can induce",
       "may cause", "contributed to", "elicited"},
      {"was induced by", "was caused by", "developed after", "occurred after",
       "was attributed to", "is secondary to", "was triggered by",
       "emerged during treatment with", "followed exposure to",
       "was provoked by"}});
  g.cues_.push_back(CueSet{
      {"was used to treat", "did not cause", "was given for", "reduced",
       "prevented", "was compared with", "did not induce", "improved",
       "had no effect on", "was not associated with", "alleviated",
       "was administered to patients with", "attenuated",
       "was effective against", "is indicated for", "protected against",
       "and", "was studied in"},
      {"was treated with", "was not caused by", "was unrelated to",
       "was managed with", "improved with", "responded to", "and",
       "was prevented by", "was not induced by", "resolved after stopping"}});
  g.openers_ = kOpeners;
  g.a_modifiers_ = kAModifiers;
  g.b_modifiers_ = kBModifiers;
  g.closers_ = kClosers;
  return g;
}

TemplateGrammar TemplateGrammar::multiclass(
    std::vector<std::string> relation_types) {
  TemplateGrammar g;
  g.schema_.relation_types = std::move(relation_types);
  g.schema_.validate();
  const size_t classes = g.schema_.num_classes();
  const size_t per_class = kMultiStems.size() / classes;
  if (per_class < 2) throw Error("multiclass grammar: too many relation types");
  for (size_t c = 0; c < classes; ++c) {
    CueSet cues;
    for (size_t j = 0; j < per_class; ++j) {
      const std::string& stem = kMultiStems[c * per_class + j];
      cues.forward.push_back(stem);
      cues.reverse.push_back("was " + stem + " by");
    }
    g.cues_.push_back(std::move(cues));
  }
  g.openers_ = kOpeners;
  g.a_modifiers_ = kAModifiers;
  g.b_modifiers_ = kBModifiers;
  g.closers_ = kClosers;
  return g;
}

TokenSequence TemplateGrammar::sentence(size_t class_index, Rng& rng) const {
  if (class_index >= cues_.size())
    throw Error("template grammar: class index out of range");
  size_t source = class_index;
  if (label_noise_ > 0.0 && rng.uniform01() < label_noise_ && cues_.size() > 1) {
    source = rng.uniform_index(cues_.size() - 1);
    if (source >= class_index) ++source;
  }
  const CueSet& cues = cues_[source];
  const bool reversed = rng.uniform01() < 0.3;

  TokenSequence out;
  append_words(out, pick(openers_, rng));
  if (!reversed) {
    out.push_back(schema_.mask_a);
    append_words(out, pick(a_modifiers_, rng));
    append_words(out, pick(cues.forward, rng));
    out.push_back(schema_.mask_b);
    append_words(out, pick(b_modifiers_, rng));
  } else {
    out.push_back(schema_.mask_b);
    append_words(out, pick(b_modifiers_, rng));
    append_words(out, pick(cues.reverse, rng));
    out.push_back(schema_.mask_a);
    append_words(out, pick(a_modifiers_, rng));
  }
  append_words(out, pick(closers_, rng));
  return out;
}

RelationInstance TemplateGrammar::instance(const std::string& id,
                                           size_t class_index, Rng& rng) const {
  return {id, sentence(class_index, rng), schema_.label_of(class_index)};
}

Dataset make_fixture(const TemplateGrammar& grammar, const FixtureShape& shape,
                     uint64_t seed) {
  const auto& schema = grammar.schema();
  auto build = [&](const std::vector<size_t>& counts, const std::string& split,
                   uint64_t stream) {
    if (!counts.empty() && counts.size() != schema.num_classes())
      throw Error("make_fixture: counts must cover every class");
    Rng rng(derive_seed(seed, stream));
    std::vector<size_t> labels;
    for (size_t c = 0; c < counts.size(); ++c)
      labels.insert(labels.end(), counts[c], c);
    rng.shuffle(labels);
    std::vector<RelationInstance> out;
    out.reserve(labels.size());
    for (size_t i = 0; i < labels.size(); ++i)
      out.push_back(grammar.instance(split + "-" + std::to_string(i), labels[i], rng));
    return out;
  };
  Dataset dataset;
  dataset.schema = schema;
  dataset.train = build(shape.train, "train", 1);
  dataset.dev = build(shape.dev, "dev", 2);
  dataset.test = build(shape.test, "test", 3);
  return dataset;
}

Dataset make_imbalanced_task(uint64_t seed, size_t train_positives,
                             size_t train_negatives) {
  TemplateGrammar grammar = TemplateGrammar::binary();
  grammar.set_label_noise(0.05);
  return make_fixture(grammar,
                      {{train_positives, train_negatives}, {150, 600}, {400, 1600}},
                      seed);
}

Dataset make_cdr_shaped(uint64_t seed) {
  // Dev and test keep the train positive rate (1,453 / 3,597).
  TemplateGrammar grammar = TemplateGrammar::binary();
  grammar.set_label_noise(0.05);
  return make_fixture(grammar, {{1453, 2144}, {1566, 2310}, {1537, 2269}}, seed);
}

Dataset make_ddi_shaped(uint64_t seed) {
  TemplateGrammar grammar =
      TemplateGrammar::multiclass({"advise", "effect", "int", "mechanism"});
  grammar.set_label_noise(0.05);
  // 22,501 train with 3,247 positives; dev and test follow the train mix.
  return make_fixture(grammar,
                      {{153, 658, 1083, 1353, 19254},
                       {30, 129, 212, 265, 3765},
                       {39, 166, 274, 342, 4868}},
                      seed);
}

std::vector<TokenSequence> make_in_domain_corpus(const TemplateGrammar& grammar,
                                                 size_t n, double positive_share,
                                                 uint64_t seed) {
  Rng rng(seed);
  const auto& schema = grammar.schema();
  std::vector<TokenSequence> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    size_t c = schema.null_index();
    if (rng.uniform01() < positive_share)
      c = rng.uniform_index(schema.num_relation_types());
    out.push_back(grammar.sentence(c, rng));
  }
  return out;
}

}  // namespace dare
