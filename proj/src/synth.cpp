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

#include "triage/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "triage/errors.hpp"
#include "triage/parallel.hpp"

namespace triage {

namespace {

const std::vector<std::string> kComponents = {"cache", "decoder", "fabric", "fpu", "lsu", "mmu"};
const std::vector<std::string> kPriorities = {"P4", "P3", "P2", "P1"};
// Headline vocabulary per severity band (low .. high).
const std::vector<std::vector<std::string>> kBandWords = {
    {"typo", "cosmetic", "warning", "lint", "comment"},
    {"testbench", "regression", "checker", "coverage", "assertion"},
    {"timeout", "hang", "deadlock", "livelock", "starvation"},
    {"corruption", "silicon", "mismatch", "parity", "ecc"}};
const std::vector<std::string> kFiller = {"observed", "failing", "seed", "run", "nightly", "block", "signal",
                                          "trace", "waveform", "reproduce"};

std::string pick(const std::vector<std::string>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int clamp_int(double v, int lo, int hi) { return std::clamp(static_cast<int>(std::lround(v)), lo, hi); }

std::vector<std::string> all_words() {
  std::vector<std::string> w = kFiller;
  for (const auto& band : kBandWords) w.insert(w.end(), band.begin(), band.end());
  return w;
}

// Every field, the history and the labels drawn independently and uniformly.
BaseTicket noise_ticket(const std::string& id, Instant opened, const SynthOptions& o, std::mt19937_64& rng,
                        LabelSet& labels) {
  static const std::vector<std::string> words = all_words();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  BaseTicket t;
  t.base_id = id;
  t.static_fields["component"] = Categorical{pick(kComponents, rng)};
  t.static_fields["priority"] = Categorical{pick(kPriorities, rng)};
  t.static_fields["effort_estimate"] = Numerical{std::round(u(rng) * 1000.0) / 10.0};
  t.static_fields["found_date"] = Date{opened};
  std::string headline;
  for (int k = 0; k < 4; ++k) headline += (k ? " " : "") + pick(words, rng);
  t.static_fields["headline"] = Text{headline};
  const std::size_t n_events = std::uniform_int_distribution<std::size_t>(o.min_events, o.max_events)(rng);
  Instant clock = opened;
  for (std::size_t e = 0; e < n_events; ++e) {
    TicketEvent ev;
    clock += static_cast<Instant>(u(rng) * 200.0 * 3600.0) + 60;
    ev.timestamp = clock;
    ev.discussion_text = pick(words, rng) + " " + pick(words, rng) + " " + pick(words, rng);
    t.events.push_back(std::move(ev));
  }
  t.closed_at = clock + static_cast<Instant>(u(rng) * 1000.0 * 3600.0) + 3600;
  labels.risk = static_cast<RiskLabel>(std::uniform_int_distribution<int>(0, 5)(rng));
  labels.debug = std::uniform_int_distribution<int>(0, 10)(rng);
  labels.resolution = std::uniform_int_distribution<int>(0, 10)(rng);
  return t;
}

}  // namespace

SynthCorpus generate_synthetic(const SynthOptions& o) {
  if (o.n_tickets == 0) throw std::invalid_argument("synthetic corpus needs at least one ticket");
  if (o.min_events < 1 || o.max_events < o.min_events) throw std::invalid_argument("bad event-count range");
  if (!(o.outlier_fraction >= 0.0 && o.outlier_fraction <= 1.0)) {
    throw std::invalid_argument("outlier fraction must lie in [0, 1]");
  }
  SynthCorpus out;
  out.schema = Schema({{"component", FieldKind::categorical},
                       {"priority", FieldKind::categorical},
                       {"effort_estimate", FieldKind::numerical},
                       {"found_date", FieldKind::date},
                       {"headline", FieldKind::text}});
  std::vector<BaseTicket> tickets;
  const Instant epoch = parse_iso8601("2020-01-06T09:00:00Z").value();
  std::vector<bool> is_outlier(o.n_tickets, false);
  {
    std::vector<std::size_t> idx(o.n_tickets);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::mt19937_64 rng(mix_seed(o.seed, 0x0071E5));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_out = static_cast<std::size_t>(std::lround(o.outlier_fraction * static_cast<double>(o.n_tickets)));
    for (std::size_t k = 0; k < n_out; ++k) is_outlier[idx[k]] = true;
  }
  for (std::size_t i = 0; i < o.n_tickets; ++i) {
    std::mt19937_64 rng(mix_seed(o.seed, i));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    if (is_outlier[i]) {
      const Instant opened = epoch + static_cast<Instant>(i) * 86400 * 2;
      LabelSet l;
      tickets.push_back(noise_ticket(std::to_string(i + 1), opened, o, rng, l));
      out.labels[tickets.back().base_id] = l;
      out.outlier_ids.insert(tickets.back().base_id);
      continue;
    }
    const double severity = u(rng);  // latent, in [0, 1)
    const std::size_t band = std::min<std::size_t>(3, static_cast<std::size_t>(severity * 4.0));

    BaseTicket t;
    t.base_id = std::to_string(i + 1);
    // Components partition the severity axis with some overlap.
    const std::size_t comp = std::min<std::size_t>(
        kComponents.size() - 1,
        static_cast<std::size_t>(std::clamp(severity * 6.0 + 0.6 * noise(rng), 0.0, 5.999)));
    t.static_fields["component"] = Categorical{kComponents[comp]};
    t.static_fields["priority"] =
        u(rng) < 0.1 ? FieldValue{Missing{}} : FieldValue{Categorical{kPriorities[std::min<std::size_t>(3, band)]}};
    t.static_fields["effort_estimate"] =
        u(rng) < 0.2 ? FieldValue{Missing{}} : FieldValue{Numerical{std::round((2.0 + 20.0 * severity + 2.0 * noise(rng)) * 10.0) / 10.0}};
    const Instant opened = epoch + static_cast<Instant>(i) * 86400 * 2 + static_cast<Instant>(u(rng) * 36000);
    t.static_fields["found_date"] = Date{opened};
    std::string headline = pick(kBandWords[band], rng) + " " + pick(kFiller, rng) + " in " + kComponents[comp];
    if (u(rng) < 0.5) headline += " " + pick(kBandWords[band], rng);
    t.static_fields["headline"] = Text{headline};

    const std::size_t span = o.max_events - o.min_events;
    const std::size_t n_events =
        o.min_events + std::min(span, static_cast<std::size_t>(std::floor((severity * 0.7 + 0.3 * u(rng)) *
                                                                          static_cast<double>(span + 1))));
    Instant clock = opened;
    const double mean_gap_h = 4.0 + 60.0 * severity;
    for (std::size_t e = 0; e < n_events; ++e) {
      TicketEvent ev;
      std::exponential_distribution<double> gap(1.0 / mean_gap_h);
      clock += static_cast<Instant>(gap(rng) * 3600.0) + 60;
      ev.timestamp = clock;
      if (e == 0) {
        ev.discussion_text = "<p>Found " + pick(kBandWords[band], rng) + " while running " + pick(kFiller, rng) +
                             "</p> log attached";
        ev.attachments_meta = std::vector<std::string>{"sim.log"};
      } else if (u(rng) < 0.7) {
        ev.discussion_text = pick(kFiller, rng) + " " + pick(kBandWords[band], rng) + " " + pick(kFiller, rng);
      }
      if (e == 1 && u(rng) < 0.5) {
        const std::string old_p = kPriorities[std::min<std::size_t>(3, band)];
        const std::string new_p = kPriorities[std::min<std::size_t>(3, band + (u(rng) < 0.5 ? 0 : 1))];
        if (old_p != new_p) ev.field_changes["priority"] = {old_p, new_p};
      }
      t.events.push_back(std::move(ev));
    }
    std::exponential_distribution<double> tail(1.0 / (24.0 + 200.0 * severity));
    t.closed_at = clock + static_cast<Instant>(tail(rng) * 3600.0) + 3600;

    LabelSet l;
    // Risk classes run from most to least critical, so severity maps inversely.
    int risk = clamp_int((1.0 - severity) * 5.0 + 0.5 * noise(rng), 0, 5);
    int debug = clamp_int(severity * 10.0 + 1.0 * noise(rng), 0, 10);
    int resolution = clamp_int(severity * 8.0 + 1.0 + 1.2 * noise(rng), 0, 10);
    if (u(rng) < o.label_noise) risk = std::uniform_int_distribution<int>(0, 5)(rng);
    if (u(rng) < o.label_noise) debug = std::uniform_int_distribution<int>(0, 10)(rng);
    if (u(rng) < o.label_noise) resolution = std::uniform_int_distribution<int>(0, 10)(rng);
    l.risk = static_cast<RiskLabel>(risk);
    l.debug = debug;
    l.resolution = resolution;
    out.labels[t.base_id] = l;
    tickets.push_back(std::move(t));
  }
  out.corpus = Corpus(std::move(tickets));
  return out;
}

void write_synthetic(const SynthCorpus& s, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / "schema.json");
    f << s.schema.to_json_text() << '\n';
  }
  {
    std::ofstream f(fs::path(dir) / "corpus.jsonl");
    write_corpus(f, s.corpus);
  }
  std::ofstream f(fs::path(dir) / "labels.jsonl");
  for (const auto& id : s.corpus.ids()) {
    nlohmann::json row = expert_labels_to_json(s.labels.at(id));
    row["base_id"] = id;
    f << row.dump() << '\n';
  }
  if (!f) throw Error("cannot write synthetic corpus to '" + dir + "'");
}

}  // namespace triage
