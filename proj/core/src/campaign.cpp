// Copyright 2026 The Optilearn Authors. All Rights Reserved.
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

#include "optilearn/campaign.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "optilearn/errors.hpp"
#include "optilearn/json_util.hpp"
#include "optilearn/problems.hpp"

namespace optilearn {

namespace {

namespace ju = json_util;
using nlohmann::json;

constexpr std::uint64_t kKgTag = 0x4b47;
constexpr std::uint64_t kPickTag = 0x5049;

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

json seed_json(std::uint64_t seed) {
  if (seed <= (std::uint64_t{1} << 53)) return json(seed);
  return json(std::to_string(seed));
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::optional<double> optional_finite(const json& body, const std::string& key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  const double v = ju::as_number(*it, key);
  if (!std::isfinite(v)) throw InputError(key + " must be finite", key);
  return v;
}

std::string optional_string(const json& body, const std::string& key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return {};
  return ju::as_string(*it, key);
}

bool stochastic(PolicyKind kind) {
  return kind == PolicyKind::kExploration || kind == PolicyKind::kBoltzmann || kind == PolicyKind::kThompson;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_all(int fd, const char* data, std::size_t size) {
  while (size > 0) {
    const ssize_t w = ::write(fd, data, size);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error(std::string("write failed: ") + std::strerror(errno));
    }
    data += w;
    size -= static_cast<std::size_t>(w);
  }
}

}  // namespace

// --- declaration ----------------------------------------------------------

CampaignDeclaration parse_declaration(const json& doc) {
  if (!doc.is_object()) throw ConfigError("campaign declaration must be a JSON object");
  if (auto it = doc.find("type"); it != doc.end() && ju::as_string(*it, "type") != "declaration") {
    throw ConfigError("type: first line must be the declaration", "type");
  }
  if (auto it = doc.find("version"); it != doc.end() && ju::as_integer(*it, "version") != kCampaignSchemaVersion) {
    throw ConfigError("version: unsupported campaign schema version", "version");
  }
  static const std::vector<std::string> kKnown = {"type", "version", "id", "candidates", "prior", "budget", "policy",
                                                  "objective", "threshold", "seed", "repetitions", "created_at"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw ConfigError(key + ": unknown declaration field", key);
    }
  }

  CampaignDeclaration d;
  d.id = optional_string(doc, "id");
  if (!d.id.empty() && !valid_id(d.id)) throw ConfigError("id: must be 1-64 characters of [A-Za-z0-9_-]", "id");

  std::vector<std::string> names;
  std::vector<std::optional<VectorXd>> coords;
  if (auto it = doc.find("candidates"); it != doc.end()) {
    if (!it->is_array() || it->empty()) throw ConfigError("candidates: expected a nonempty array", "candidates");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& c = (*it)[i];
      const std::string p = ju::index("candidates", i);
      if (c.is_string()) {
        names.push_back(c.get<std::string>());
        coords.emplace_back();
        continue;
      }
      names.push_back(ju::as_string(ju::require(c, "name", p), ju::join(p, "name")));
      if (c.contains("coords")) coords.emplace_back(ju::as_vector(c["coords"], ju::join(p, "coords")));
      else coords.emplace_back();
    }
  }

  const json& prior = ju::require(doc, "prior", "");
  try {
    d.prior = belief_from_json(prior, names.empty() ? nullptr : &names);
  } catch (const Error& e) {
    const std::string p = ju::join("prior", e.field_path());
    std::string message = e.what();
    if (!e.field_path().empty() && message.rfind(e.field_path() + ": ", 0) == 0) message = message.substr(e.field_path().size() + 2);
    throw ConfigError(p + ": " + message, p);
  }
  if (!names.empty() && alternatives(d.prior) != names) {
    throw ConfigError("candidates: names differ from prior.alternatives", "candidates");
  }

  const std::size_t with_coords = static_cast<std::size_t>(std::count_if(coords.begin(), coords.end(), [](const auto& c) { return c.has_value(); }));
  if (with_coords != 0) {
    if (with_coords != coords.size()) throw ConfigError("candidates: coords must be given for every candidate or none", "candidates");
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i]->size() != coords[0]->size() || coords[i]->size() == 0) {
        throw ConfigError(ju::index("candidates", i) + ".coords: inconsistent dimension", ju::join(ju::index("candidates", i), "coords"));
      }
      d.coordinates.push_back(*coords[i]);
    }
  } else {
    const std::vector<VectorXd>* designs = nullptr;
    if (const auto* l = std::get_if<LinearGaussianBelief>(&d.prior)) designs = &l->designs;
    if (const auto* s = std::get_if<SampledBelief>(&d.prior)) designs = &s->designs;
    if (designs != nullptr && !designs->empty() && (*designs)[0].size() >= 1 && (*designs)[0].size() <= 2) {
      d.coordinates = *designs;
    }
  }

  const auto budget = ju::as_integer(ju::require(doc, "budget", ""), "budget");
  if (budget < 1 || budget > 1000000) throw ConfigError("budget: N must be >= 1", "budget");
  d.budget = static_cast<int>(budget);
  if (doc.contains("policy")) d.policy = policy_from_json(doc["policy"], "policy");
  else d.policy.kind = PolicyKind::kKgOffline;
  try {
    check_compatible(d.policy, d.prior);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("policy: ") + e.what(), "policy");
  }
  if (doc.contains("objective")) {
    try {
      d.objective = objective_from_string(ju::as_string(doc["objective"], "objective"));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("objective: ") + e.what(), "objective");
    }
  }
  if (doc.contains("threshold") && !doc["threshold"].is_null()) {
    d.threshold = ju::as_number(doc["threshold"], "threshold");
    if (std::isnan(*d.threshold)) throw ConfigError("threshold: must be a number", "threshold");
  }
  if (doc.contains("seed")) d.seed = ju::as_seed(doc["seed"], "seed");
  d.repetitions = static_cast<int>(ju::integer_or(doc, "repetitions", 1, ""));
  if (d.repetitions < 1) throw ConfigError("repetitions: J must be >= 1", "repetitions");
  d.created_at = optional_string(doc, "created_at");
  return d;
}

json to_json(const CampaignDeclaration& d) {
  json doc;
  doc["type"] = "declaration";
  doc["version"] = kCampaignSchemaVersion;
  doc["id"] = d.id;
  json candidates = json::array();
  const auto& names = alternatives(d.prior);
  for (std::size_t i = 0; i < names.size(); ++i) {
    json c = {{"name", names[i]}};
    if (!d.coordinates.empty()) c["coords"] = ju::vector(d.coordinates[i]);
    candidates.push_back(c);
  }
  doc["candidates"] = candidates;
  doc["prior"] = to_json(d.prior);
  doc["budget"] = d.budget;
  doc["policy"] = to_json(d.policy);
  doc["objective"] = std::string(to_string(d.objective));
  doc["threshold"] = d.threshold ? ju::number(*d.threshold) : json(nullptr);
  doc["seed"] = seed_json(d.seed);
  doc["repetitions"] = d.repetitions;
  doc["created_at"] = d.created_at;
  return doc;
}

// --- Campaign -------------------------------------------------------------

Campaign Campaign::create(const CampaignDeclaration& declaration) {
  if (!valid_id(declaration.id)) throw ConfigError("id: must be 1-64 characters of [A-Za-z0-9_-]", "id");
  Campaign c;
  c.declaration_ = declaration;
  c.belief_ = declaration.prior;
  c.counts_.assign(size(declaration.prior), 0);
  c.lines_.push_back(ju::dump_line(to_json(declaration)));
  return c;
}

Campaign Campaign::from_document(const std::string& text, bool* dropped_tail) {
  if (dropped_tail != nullptr) *dropped_tail = false;
  std::vector<std::string> raw;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    if (end == std::string::npos) {
      std::string tail = text.substr(start);
      const bool parses = json::accept(tail);
      if (parses) raw.push_back(std::move(tail));
      else if (dropped_tail != nullptr) *dropped_tail = true;
      break;
    }
    raw.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  std::vector<std::pair<std::size_t, std::string>> lines;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!raw[i].empty() && raw[i] != "\r") lines.emplace_back(i + 1, raw[i]);
  }
  if (lines.empty()) throw ConfigError("line 1: campaign document is empty");

  json head;
  try {
    head = json::parse(lines[0].second);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(lines[0].first) + ": malformed declaration: " + e.what());
  }
  CampaignDeclaration decl;
  try {
    decl = parse_declaration(head);
  } catch (const Error& e) {
    throw ConfigError("line " + std::to_string(lines[0].first) + ": " + e.what(), e.field_path());
  }
  Campaign c = create(decl);
  c.lines_[0] = lines[0].second;
  for (std::size_t i = 1; i < lines.size(); ++i) c.apply_line(lines[i].second, lines[i].first);
  return c;
}

std::string Campaign::document() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

bool Campaign::binary() const {
  const auto* s = std::get_if<SampledBelief>(&belief_);
  return s != nullptr && s->model.binary();
}

const CampaignEvent* Campaign::find_event(const std::string& event_key) const {
  auto it = keys_.find(event_key);
  return it == keys_.end() ? nullptr : &events_[it->second];
}

std::string Campaign::prepare_observation(const json& body, const std::string& recorded_at) const {
  if (!body.is_object()) throw InputError("observation body must be a JSON object");
  if (n_ >= declaration_.budget) {
    throw ConflictError("budget exhausted: " + std::to_string(n_) + " of " + std::to_string(declaration_.budget) +
                        " experiments recorded");
  }
  const auto& names = alternatives(belief_);
  std::string candidate;
  if (auto it = body.find("candidate"); it != body.end()) {
    candidate = ju::as_string(*it, "candidate");
    if (std::find(names.begin(), names.end(), candidate) == names.end()) {
      throw NotFoundError("unknown candidate '" + candidate + "'", "candidate");
    }
  } else if (auto idx = body.find("index"); idx != body.end()) {
    const auto i = ju::as_integer(*idx, "index");
    if (i < 0 || static_cast<std::size_t>(i) >= names.size()) throw NotFoundError("unknown candidate index", "index");
    candidate = names[static_cast<std::size_t>(i)];
  } else {
    throw InputError("candidate: missing required field", "candidate");
  }
  const double outcome = ju::as_number(ju::require(body, "outcome", ""), "outcome");
  if (!std::isfinite(outcome)) throw InputError("outcome must be finite", "outcome");
  if (binary() && outcome != 0.0 && outcome != 1.0) throw InputError("binary campaign expects outcome 0 or 1", "outcome");

  json event;
  event["type"] = "observation";
  event["n"] = n_ + 1;
  event["candidate"] = candidate;
  event["outcome"] = outcome;
  event["note"] = optional_string(body, "note");
  std::string key = optional_string(body, "event_key");
  if (key.size() > 200) throw InputError("event_key longer than 200 characters", "event_key");
  event["event_key"] = key.empty() ? "obs-" + std::to_string(n_ + 1) : key;
  event["recorded_at"] = recorded_at;
  if (auto d = optional_finite(body, "duration")) event["duration"] = *d;
  if (auto c = optional_finite(body, "cost")) event["cost"] = *c;
  return ju::dump_line(event);
}

std::string Campaign::prepare_decision(const json& body, const std::string& recorded_at) const {
  if (!body.is_object()) throw InputError("decision body must be a JSON object");
  const std::string candidate = ju::as_string(ju::require(body, "candidate", ""), "candidate");
  const auto& names = alternatives(belief_);
  if (std::find(names.begin(), names.end(), candidate) == names.end()) {
    throw NotFoundError("unknown candidate '" + candidate + "'", "candidate");
  }
  json event;
  event["type"] = "decision";
  event["n"] = n_;
  event["candidate"] = candidate;
  event["note"] = optional_string(body, "note");
  std::string key = optional_string(body, "event_key");
  event["event_key"] = key.empty() ? "dec-" + std::to_string(events_.size() + 1) : key;
  event["recorded_at"] = recorded_at;
  return ju::dump_line(event);
}

void Campaign::apply_line(const std::string& line, std::size_t line_number) {
  const auto fail = [&](const std::string& message, const std::string& path = {}) -> ConfigError {
    return ConfigError("line " + std::to_string(line_number) + ": " + message, path);
  };
  const bool replay = line_number != 0;
  try {
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw fail(std::string("malformed event: ") + e.what());
    }
    if (!doc.is_object()) throw fail("event must be a JSON object");
    CampaignEvent e;
    const std::string type = ju::as_string(ju::require(doc, "type", ""), "type");
    if (type == "observation") e.type = CampaignEvent::Type::kObservation;
    else if (type == "decision") e.type = CampaignEvent::Type::kDecision;
    else throw fail("unknown event type '" + type + "'", "type");
    e.n = static_cast<int>(ju::as_integer(ju::require(doc, "n", ""), "n"));
    e.candidate = ju::as_string(ju::require(doc, "candidate", ""), "candidate");
    e.note = optional_string(doc, "note");
    e.event_key = optional_string(doc, "event_key");
    e.recorded_at = optional_string(doc, "recorded_at");
    if (!e.event_key.empty() && keys_.count(e.event_key)) throw fail("duplicate event key '" + e.event_key + "'", "event_key");
    const std::size_t x = alternative_index(belief_, e.candidate);

    if (e.type == CampaignEvent::Type::kObservation) {
      if (e.n != n_ + 1) throw fail("observation n = " + std::to_string(e.n) + " out of sequence (expected " + std::to_string(n_ + 1) + ")", "n");
      if (n_ >= declaration_.budget) throw fail("observation beyond budget N = " + std::to_string(declaration_.budget), "n");
      e.outcome = ju::as_number(ju::require(doc, "outcome", ""), "outcome");
      if (!std::isfinite(e.outcome)) throw fail("outcome must be finite", "outcome");
      e.duration = optional_finite(doc, "duration");
      e.cost = optional_finite(doc, "cost");
      belief_ = update(belief_, x, e.outcome);
      ++n_;
      ++counts_[x];
    } else if (e.n != n_) {
      throw fail("decision n = " + std::to_string(e.n) + " differs from current n = " + std::to_string(n_), "n");
    }
    if (!e.event_key.empty()) keys_[e.event_key] = events_.size();
    events_.push_back(std::move(e));
    lines_.push_back(line);
  } catch (const ConfigError& err) {
    if (!replay || std::string(err.what()).rfind("line ", 0) == 0) throw;
    throw fail(err.what(), err.field_path());
  } catch (const Error& err) {
    if (!replay) throw;
    throw fail(err.what(), err.field_path());
  }
}

json campaign_summary(const Campaign& c) {
  const auto& d = c.declaration();
  json doc;
  doc["id"] = c.id();
  doc["n"] = c.n();
  doc["budget"] = c.budget();
  doc["remaining"] = c.budget() - c.n();
  doc["budget_exhausted"] = c.n() >= c.budget();
  doc["objective"] = std::string(to_string(d.objective));
  doc["threshold"] = d.threshold ? ju::number(*d.threshold) : json(nullptr);
  doc["policy"] = to_json(d.policy);
  doc["candidates"] = alternatives(c.belief());
  if (!d.coordinates.empty()) {
    json coords = json::array();
    for (const auto& v : d.coordinates) coords.push_back(ju::vector(v));
    doc["coordinates"] = coords;
  }
  doc["belief"] = to_json(c.belief());
  doc["theta"] = ju::vector(point_estimates(c.belief()));
  doc["sigma"] = ju::vector(truth_stddevs(c.belief()));
  doc["counts"] = c.counts();
  doc["events"] = c.events().size();
  doc["created_at"] = d.created_at;
  doc["updated_at"] = c.events().empty() ? d.created_at : c.events().back().recorded_at;
  const std::string document = c.document();
  doc["log_hash"] = hex64(fnv1a64(document.data(), document.size()));
  return doc;
}

// --- recommendation -------------------------------------------------------

std::uint64_t campaign_kg_seed(const Campaign& c) {
  return derive_seed(c.declaration().seed, {static_cast<std::uint64_t>(c.n()), kKgTag});
}

Recommendation recommend(const Campaign& c) {
  const auto& d = c.declaration();
  const BeliefState& belief = c.belief();
  const std::size_t m = size(belief);
  const VectorXd theta = point_estimates(belief);
  const VectorXd sigma = truth_stddevs(belief);
  const std::uint64_t seed = campaign_kg_seed(c);
  const auto offline = kg_offline_scores(belief, d.policy.kg, seed);
  const double remaining = static_cast<double>(c.budget() - c.n());

  Recommendation r;
  r.campaign_id = c.id();
  r.policy = d.policy.label();
  r.n = c.n();
  r.budget = c.budget();
  r.budget_exhausted = c.n() >= c.budget();

  DecisionContext ctx;
  ctx.belief = &belief;
  ctx.counts = c.counts();
  ctx.iteration = c.n();
  ctx.budget = c.budget();

  VectorXd scores(static_cast<Eigen::Index>(m));
  VectorXd nu(static_cast<Eigen::Index>(m));
  for (std::size_t x = 0; x < m; ++x) nu[static_cast<Eigen::Index>(x)] = offline[x].nu;
  if (r.budget_exhausted || d.policy.kind == PolicyKind::kExploitation) {
    scores = theta;
  } else if (d.policy.kind == PolicyKind::kKgOffline) {
    scores = nu;
  } else if (d.policy.kind == PolicyKind::kKgOnline) {
    scores = theta + remaining * nu;
  } else {
    scores = policy_scores(d.policy, ctx, seed);
  }

  if (r.budget_exhausted) {
    r.pick = argmax(theta);
  } else if (stochastic(d.policy.kind) || d.policy.tie_break == TieBreak::kRandom) {
    PolicyStreams streams(derive_seed(d.seed, {static_cast<std::uint64_t>(c.n()), kPickTag}));
    r.pick = decide(d.policy, ctx, streams);
  } else {
    r.pick = argmax(scores);
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
  });
  const auto& names = alternatives(belief);
  for (std::size_t rank = 0; rank < m; ++rank) {
    const std::size_t x = order[rank];
    const auto i = static_cast<Eigen::Index>(x);
    RecommendationRow row;
    row.index = x;
    row.candidate = names[x];
    row.theta = theta[i];
    row.sigma = sigma[i];
    row.nu_kg = nu[i];
    row.nu_online = theta[i] + remaining * nu[i];
    row.score = scores[i];
    row.rank = static_cast<int>(rank + 1);
    r.rows.push_back(row);
  }
  return r;
}

json to_json(const Recommendation& r) {
  json doc;
  doc["campaign_id"] = r.campaign_id;
  doc["policy"] = r.policy;
  doc["n"] = r.n;
  doc["budget"] = r.budget;
  doc["budget_exhausted"] = r.budget_exhausted;
  std::string pick_name;
  json rows = json::array();
  for (const auto& row : r.rows) {
    if (row.index == r.pick) pick_name = row.candidate;
    rows.push_back({{"index", row.index},
                    {"candidate", row.candidate},
                    {"theta", ju::number(row.theta)},
                    {"sigma", ju::number(row.sigma)},
                    {"nu_kg", ju::number(row.nu_kg)},
                    {"nu_online", ju::number(row.nu_online)},
                    {"score", ju::number(row.score)},
                    {"rank", row.rank}});
  }
  doc["pick"] = {{"index", r.pick}, {"candidate", pick_name}};
  doc["rows"] = rows;
  return doc;
}

std::string to_text(const Recommendation& r) {
  std::ostringstream os;
  os << "campaign " << r.campaign_id << "  n=" << r.n << "/" << r.budget << "  policy " << r.policy;
  if (r.budget_exhausted) os << "  [budget exhausted]";
  os << "\n";
  os << std::left << std::setw(5) << "rank" << std::setw(18) << "candidate" << std::right << std::setw(14) << "theta"
     << std::setw(14) << "sigma" << std::setw(14) << "nu_kg" << std::setw(14) << "nu_online" << std::setw(14)
     << "score" << "\n";
  os << std::setprecision(6);
  std::string pick;
  for (const auto& row : r.rows) {
    if (row.index == r.pick) pick = row.candidate;
    os << std::left << std::setw(5) << row.rank << std::setw(18) << row.candidate << std::right << std::setw(14)
       << row.theta << std::setw(14) << row.sigma << std::setw(14) << row.nu_kg << std::setw(14) << row.nu_online
       << std::setw(14) << row.score << "\n";
  }
  os << "pick: " << pick << "\n";
  return os.str();
}

// --- surface --------------------------------------------------------------

CampaignSurface campaign_surface(const Campaign& c) {
  const auto& d = c.declaration();
  if (d.coordinates.empty() || d.coordinates[0].size() > 2) {
    throw UnsupportedBeliefError("campaign candidates have no 1-D or 2-D grid coordinates");
  }
  CampaignSurface s;
  s.campaign_id = c.id();
  s.n = c.n();
  s.candidates = alternatives(c.belief());
  s.coordinates = d.coordinates;
  std::vector<std::size_t> all(size(c.belief()));
  std::iota(all.begin(), all.end(), 0);
  s.rows = kg_surface(c.belief(), all, d.policy.kg, campaign_kg_seed(c), c.budget(), c.n());
  return s;
}

json to_json(const CampaignSurface& s) {
  json doc;
  doc["campaign_id"] = s.campaign_id;
  doc["n"] = s.n;
  doc["dimension"] = s.coordinates.empty() ? 0 : s.coordinates[0].size();
  json rows = json::array();
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const auto& r = s.rows[i];
    rows.push_back({{"candidate", s.candidates[r.alternative]},
                    {"coords", ju::vector(s.coordinates[r.alternative])},
                    {"theta", ju::number(r.theta)},
                    {"sigma", ju::number(r.sigma)},
                    {"nu", ju::number(r.nu)},
                    {"nu_online", ju::number(r.nu_online)},
                    {"stderr", ju::number(r.standard_error)}});
  }
  doc["rows"] = rows;
  return doc;
}

std::string to_csv(const CampaignSurface& s) {
  std::ostringstream os;
  const Eigen::Index dim = s.coordinates.empty() ? 0 : s.coordinates[0].size();
  os << "candidate";
  for (Eigen::Index k = 0; k < dim; ++k) os << "," << (k == 0 ? "x" : "y");
  os << ",theta,sigma,nu,nu_online,stderr\n";
  for (const auto& r : s.rows) {
    os << s.candidates[r.alternative];
    for (Eigen::Index k = 0; k < dim; ++k) os << "," << ju::number_text(s.coordinates[r.alternative][k]);
    os << "," << ju::number_text(r.theta) << "," << ju::number_text(r.sigma) << "," << ju::number_text(r.nu) << ","
       << ju::number_text(r.nu_online) << "," << ju::number_text(r.standard_error) << "\n";
  }
  return os.str();
}

// --- risk -----------------------------------------------------------------

RiskForecast forecast_risk(const Campaign& c, int simulations, int bins) {
  const auto& d = c.declaration();
  if (!d.threshold) throw ConflictError("campaign has no threshold configured", "threshold");
  if (simulations < 1 || simulations > 1000000) throw InputError("sims must lie in [1, 1000000]", "sims");
  const Problem problem = problem_from_belief(c.belief(), d.coordinates);
  EvaluationOptions o;
  o.budget = c.budget() - c.n();
  o.replications = simulations;
  o.repetitions = d.repetitions;
  o.threshold = *d.threshold;
  o.seed = derive_seed(fnv1a64(c.id().data(), c.id().size()), {d.seed, static_cast<std::uint64_t>(c.n())});
  const RiskReport risk = risk_probability(d.policy, problem, o, bins);

  RiskForecast f;
  f.campaign_id = c.id();
  f.n = c.n();
  f.remaining = o.budget;
  f.threshold = *d.threshold;
  f.simulations = simulations;
  f.probability = risk.report.probability;
  f.histogram = risk.histogram;
  return f;
}

json to_json(const RiskForecast& f) {
  json doc;
  doc["campaign_id"] = f.campaign_id;
  doc["n"] = f.n;
  doc["remaining"] = f.remaining;
  doc["threshold"] = ju::number(f.threshold);
  doc["simulations"] = f.simulations;
  doc["probability"] = f.probability.mean;
  doc["ci_half_width"] = f.probability.half_width;
  json bins = json::array();
  for (std::size_t b = 0; b < f.histogram.counts.size(); ++b) {
    bins.push_back({{"bin_left", f.histogram.edges[b]}, {"bin_right", f.histogram.edges[b + 1]}, {"count", f.histogram.counts[b]}});
  }
  doc["histogram"] = bins;
  return doc;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << "." << std::setw(3) << std::setfill('0') << ms << "Z";
  return os.str();
}

// --- CampaignStore --------------------------------------------------------

std::shared_ptr<const Campaign> CampaignStore::Entry::snapshot() const {
  std::lock_guard<std::mutex> lock(snapshot_mutex);
  return current;
}

void CampaignStore::Entry::publish(std::shared_ptr<const Campaign> next) {
  std::lock_guard<std::mutex> lock(snapshot_mutex);
  current = std::move(next);
}

CampaignStore::CampaignStore(StoreOptions options) : options_(std::move(options)) {
  namespace fs = std::filesystem;
  fs::create_directories(options_.directory);
  std::vector<fs::path> files;
  for (const auto& item : fs::directory_iterator(options_.directory)) {
    if (item.is_regular_file() && item.path().extension() == ".jsonl") files.push_back(item.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    try {
      const std::string text = read_file(file);
      bool dropped = false;
      Campaign c = Campaign::from_document(text, &dropped);
      if (c.id() != stem) {
        load_issues_.push_back({stem, "declared id '" + c.id() + "' differs from the file name; skipped"});
        continue;
      }
      if (dropped) {
        const std::size_t keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
        fs::resize_file(file, keep);
        load_issues_.push_back({stem, "dropped a torn final line left by an interrupted write"});
      }
      auto e = std::make_shared<Entry>();
      e->file = file;
      e->current = std::make_shared<const Campaign>(std::move(c));
      entries_[stem] = e;
    } catch (const std::exception& ex) {
      load_issues_.push_back({stem, ex.what()});
    }
  }
}

std::shared_ptr<CampaignStore::Entry> CampaignStore::entry(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw NotFoundError("unknown campaign '" + id + "'", "id");
  return it->second;
}

std::string CampaignStore::next_id(const json& declaration) {
  for (;;) {
    const std::string seed = ju::dump_line(declaration) + options_.clock() + std::to_string(id_counter_++);
    const std::string id = "c" + hex64(fnv1a64(seed.data(), seed.size())).substr(0, 12);
    if (!entries_.count(id)) return id;
  }
}

void CampaignStore::append_line(const std::filesystem::path& file, const std::string& line) const {
  const int fd = ::open(file.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot open " + file.string() + ": " + std::strerror(errno));
  struct stat st {};
  ::fstat(fd, &st);
  const std::string data = line + "\n";
  try {
    if (options_.crash_after_bytes) {
      write_all(fd, data.data(), std::min(*options_.crash_after_bytes, data.size()));
      ::close(fd);
      throw std::runtime_error("simulated crash during append");
    }
    write_all(fd, data.data(), data.size());
    if (::fsync(fd) != 0) throw std::runtime_error(std::string("fsync failed: ") + std::strerror(errno));
  } catch (const std::runtime_error& e) {
    if (!options_.crash_after_bytes) {
      if (::ftruncate(fd, st.st_size) != 0) {
        // the torn tail is dropped on the next load
      }
      ::close(fd);
    }
    throw;
  }
  ::close(fd);
}

std::shared_ptr<const Campaign> CampaignStore::insert(Campaign campaign) {
  namespace fs = std::filesystem;
  std::unique_lock lock(map_mutex_);
  if (entries_.count(campaign.id())) throw ConflictError("campaign '" + campaign.id() + "' already exists", "id");
  const fs::path file = options_.directory / (campaign.id() + ".jsonl");
  if (fs::exists(file)) throw ConflictError("campaign log for '" + campaign.id() + "' already exists", "id");
  const std::string document = campaign.document();
  append_line(file, document.substr(0, document.size() - 1));
  auto e = std::make_shared<Entry>();
  e->file = file;
  e->current = std::make_shared<const Campaign>(std::move(campaign));
  entries_[e->current->id()] = e;
  return e->current;
}

std::shared_ptr<const Campaign> CampaignStore::create(const json& declaration) {
  CampaignDeclaration d = parse_declaration(declaration);
  if (d.created_at.empty()) d.created_at = options_.clock();
  if (d.id.empty()) {
    std::shared_lock lock(map_mutex_);
    d.id = next_id(declaration);
  }
  return insert(Campaign::create(d));
}

std::shared_ptr<const Campaign> CampaignStore::import_document(const std::string& text) {
  return insert(Campaign::from_document(text));
}

std::shared_ptr<const Campaign> CampaignStore::get(const std::string& id) const { return entry(id)->snapshot(); }

ObservationResult CampaignStore::append_event(const std::string& id, const json& body, bool observation) {
  auto e = entry(id);
  std::lock_guard<std::mutex> write(e->write);
  auto current = e->snapshot();
  if (body.is_object()) {
    if (auto it = body.find("event_key"); it != body.end() && it->is_string()) {
      if (const CampaignEvent* existing = current->find_event(it->get<std::string>())) {
        return {current, *existing, true};
      }
    }
  }
  const std::string recorded_at = options_.clock();
  const std::string line = observation ? current->prepare_observation(body, recorded_at)
                                       : current->prepare_decision(body, recorded_at);
  Campaign next = *current;
  next.apply_line(line, 0);
  append_line(e->file, line);
  auto published = std::make_shared<const Campaign>(std::move(next));
  e->publish(published);
  return {published, published->events().back(), false};
}

ObservationResult CampaignStore::record_observation(const std::string& id, const json& body) {
  return append_event(id, body, true);
}

ObservationResult CampaignStore::record_decision(const std::string& id, const json& body) {
  return append_event(id, body, false);
}

std::string CampaignStore::export_document(const std::string& id) const { return get(id)->document(); }

std::vector<std::string> CampaignStore::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, e] : entries_) out.push_back(id);
  return out;
}

std::vector<StoreIssue> CampaignStore::audit() const {
  std::vector<std::pair<std::string, std::shared_ptr<Entry>>> entries;
  {
    std::shared_lock lock(map_mutex_);
    entries.assign(entries_.begin(), entries_.end());
  }
  std::vector<StoreIssue> issues;
  for (const auto& [id, e] : entries) {
    std::lock_guard<std::mutex> write(e->write);
    const auto current = e->snapshot();
    try {
      const Campaign replayed = Campaign::from_document(read_file(e->file));
      if (replayed.n() != current->n()) {
        issues.push_back({id, "replayed n differs from the served state"});
      } else if (to_json(replayed.belief()).dump() != to_json(current->belief()).dump()) {
        issues.push_back({id, "replayed belief differs from the served state"});
      }
    } catch (const std::exception& ex) {
      issues.push_back({id, ex.what()});
    }
  }
  return issues;
}

}  // namespace optilearn
