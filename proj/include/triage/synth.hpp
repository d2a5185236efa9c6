// Copyright 2026 The Triage Authors
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

#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "triage/corpus.hpp"
#include "triage/labels.hpp"

namespace triage {

// Generator for desk-scale corpora with learnable structure. Each ticket has
// a latent severity that drives its component, priority, effort estimate,
// headline words, history length, fixing time and all three expert labels.
struct SynthOptions {
  std::size_t n_tickets = 200;
  std::uint64_t seed = 0;
  std::size_t min_events = 1;
  std::size_t max_events = 15;
  // Probability that an expert label is replaced by a uniform draw.
  double label_noise = 0.1;
  // Fraction of tickets whose fields, history and labels are uniform noise
  // unrelated to any severity.
  double outlier_fraction = 0.0;
};

struct SynthCorpus {
  Schema schema;
  Corpus corpus;
  ExpertLabels labels;
  std::set<std::string> outlier_ids;
};

SynthCorpus generate_synthetic(const SynthOptions& options);

// Writes schema.json, corpus.jsonl and labels.jsonl into `dir`.
void write_synthetic(const SynthCorpus& synth, const std::string& dir);

}  // namespace triage
