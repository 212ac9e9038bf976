/*
 * Copyright 2026 The cxrlabel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "registry.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "error.h"

namespace cxrlabel {
namespace {

bool IsBlank(std::string_view text) {
  return std::all_of(text.begin(), text.end(),
                     [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
}

std::string Trimmed(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(begin, end - begin + 1));
}

void AppendUnique(std::vector<std::string>& items, std::string value) {
  if (std::find(items.begin(), items.end(), value) == items.end()) {
    items.push_back(std::move(value));
  }
}

}  // namespace

std::string_view ToString(RevisionKind kind) {
  switch (kind) {
    case RevisionKind::kSynonymAdded: return "SynonymAdded";
    case RevisionKind::kClarificationAdded: return "ClarificationAdded";
    case RevisionKind::kExemplarAdded: return "ExemplarAdded";
  }
  return "SynonymAdded";
}

RevisionKind ParseRevisionKind(std::string_view text) {
  const std::string key = NormalizeName(text);
  if (key == "synonymadded" || key == "synonym") return RevisionKind::kSynonymAdded;
  if (key == "clarificationadded" || key == "clarification") {
    return RevisionKind::kClarificationAdded;
  }
  if (key == "exemplaradded" || key == "exemplar") return RevisionKind::kExemplarAdded;
  Fail(ErrorCode::kInvalidArgument, "unknown revision kind '" + std::string(text) + "'");
}

Revision RevisionFromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) Fail(ErrorCode::kInvalidArgument, "revision must be an object");
  Revision r;
  const auto& label = doc.at("label");
  if (label.is_number_unsigned()) {
    r.label = label.get<LabelId>();
    if (r.label >= kNumLabels) Fail(ErrorCode::kUnknownLabel, "label id out of range");
  } else {
    r.label = Taxonomy::Default().Resolve(label.get<std::string>()).id;
  }
  r.kind = ParseRevisionKind(doc.at("kind").get<std::string>());
  r.payload = doc.value("payload", "");
  r.core_term = doc.value("target", "synonym") == "core_term";
  const std::string polarity = doc.value("polarity", "positive");
  if (polarity != "positive" && polarity != "negative") {
    Fail(ErrorCode::kInvalidArgument, "polarity must be 'positive' or 'negative'");
  }
  r.positive = polarity == "positive";
  return r;
}

nlohmann::ordered_json ToJson(const Revision& revision) {
  nlohmann::ordered_json doc;
  doc["label"] = LabelName(revision.label);
  doc["kind"] = ToString(revision.kind);
  doc["payload"] = revision.payload;
  if (revision.kind == RevisionKind::kSynonymAdded) {
    doc["target"] = revision.core_term ? "core_term" : "synonym";
  }
  if (revision.kind == RevisionKind::kExemplarAdded) {
    doc["polarity"] = revision.positive ? "positive" : "negative";
  }
  return doc;
}

std::vector<Revision> RevisionsFromJson(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() && doc.contains("revisions") ? doc["revisions"] : doc;
  if (!list.is_array()) Fail(ErrorCode::kInvalidArgument, "revisions must be an array");
  std::vector<Revision> out;
  for (const auto& item : list) out.push_back(RevisionFromJson(item));
  return out;
}

std::string DescribeRevisions(std::span<const Revision> revisions) {
  std::ostringstream out;
  for (std::size_t i = 0; i < revisions.size(); ++i) {
    const Revision& r = revisions[i];
    if (i > 0) out << "; ";
    out << "+1 ";
    switch (r.kind) {
      case RevisionKind::kSynonymAdded: out << (r.core_term ? "core term" : "synonym"); break;
      case RevisionKind::kClarificationAdded: out << "clarification"; break;
      case RevisionKind::kExemplarAdded:
        out << (r.positive ? "positive" : "negative") << " exemplar";
        break;
    }
    out << " (" << LabelName(r.label) << ")";
  }
  return out.str();
}

PromptRegistry::PromptRegistry(PromptVersion root) {
  AddLocked(std::move(root), false);
}

std::unique_ptr<PromptRegistry> PromptRegistry::Open(const std::filesystem::path& log_path) {
  std::ifstream in(log_path);
  if (!in) {
    auto registry = std::make_unique<PromptRegistry>();
    registry->log_path_ = log_path;
    if (log_path.has_parent_path()) std::filesystem::create_directories(log_path.parent_path());
    nlohmann::ordered_json event;
    event["event"] = "create";
    event["version"] = ToJson(*registry->Get(RootPrompt().version_id));
    registry->Append(event);
    return registry;
  }

  std::unique_ptr<PromptRegistry> registry;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (IsBlank(line)) continue;
    nlohmann::json event;
    try {
      event = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kIoError, log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const std::string kind = event.value("event", "");
    if (kind == "create") {
      PromptVersion version = PromptFromJson(event.at("version"));
      if (!registry) {
        registry = std::make_unique<PromptRegistry>(std::move(version));
      } else {
        std::lock_guard lock(registry->mu_);
        registry->AddLocked(std::move(version), false);
      }
    } else if (kind == "freeze") {
      if (!registry) Fail(ErrorCode::kIoError, "registry log starts with a freeze event");
      const auto id = event.at("version_id").get<VersionId>();
      std::lock_guard lock(registry->mu_);
      if (!registry->versions_.count(id)) {
        Fail(ErrorCode::kIoError, "registry log freezes unknown version " + std::to_string(id));
      }
      registry->frozen_.insert(id);
    } else {
      Fail(ErrorCode::kIoError, "unknown registry event '" + kind + "'");
    }
  }
  if (!registry) Fail(ErrorCode::kIoError, "registry log " + log_path.string() + " is empty");
  registry->log_path_ = log_path;
  return registry;
}

void PromptRegistry::AddLocked(PromptVersion version, bool persist) {
  const VersionId id = version.version_id;
  if (versions_.count(id)) {
    Fail(ErrorCode::kConflict, "prompt version " + std::to_string(id) + " already exists");
  }
  if (version.parent_version && !versions_.count(*version.parent_version)) {
    Fail(ErrorCode::kNotFound,
         "parent version " + std::to_string(*version.parent_version) + " does not exist");
  }
  auto stored = std::make_shared<const PromptVersion>(std::move(version));
  if (persist) {
    nlohmann::ordered_json event;
    event["event"] = "create";
    event["version"] = ToJson(*stored);
    Append(event);
  }
  versions_.emplace(id, std::move(stored));
}

void PromptRegistry::Append(const nlohmann::ordered_json& event) {
  if (!log_path_) return;
  std::ofstream out(*log_path_, std::ios::app);
  if (!out) Fail(ErrorCode::kIoError, "cannot append to " + log_path_->string());
  out << event.dump() << '\n';
  if (!out) Fail(ErrorCode::kIoError, "write failed on " + log_path_->string());
}

std::shared_ptr<const PromptVersion> PromptRegistry::Get(VersionId id) const {
  std::lock_guard lock(mu_);
  auto it = versions_.find(id);
  if (it == versions_.end()) {
    Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(id) + " not found");
  }
  return it->second;
}

bool PromptRegistry::Contains(VersionId id) const {
  std::lock_guard lock(mu_);
  return versions_.count(id) > 0;
}

std::vector<VersionId> PromptRegistry::Versions() const {
  std::lock_guard lock(mu_);
  std::vector<VersionId> ids;
  for (const auto& [id, version] : versions_) ids.push_back(id);
  return ids;
}

std::vector<VersionId> PromptRegistry::Children(VersionId id) const {
  std::lock_guard lock(mu_);
  if (!versions_.count(id)) {
    Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(id) + " not found");
  }
  std::vector<VersionId> ids;
  for (const auto& [child, version] : versions_) {
    if (version->parent_version == id) ids.push_back(child);
  }
  return ids;
}

std::vector<VersionId> PromptRegistry::Lineage(VersionId id) const {
  std::lock_guard lock(mu_);
  std::vector<VersionId> chain;
  std::optional<VersionId> cursor = id;
  while (cursor) {
    auto it = versions_.find(*cursor);
    if (it == versions_.end()) {
      Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(*cursor) + " not found");
    }
    chain.push_back(*cursor);
    cursor = it->second->parent_version;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

VersionId PromptRegistry::RootLocked(VersionId id) const {
  VersionId cursor = id;
  for (;;) {
    auto it = versions_.find(cursor);
    if (it == versions_.end()) {
      Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(cursor) + " not found");
    }
    if (!it->second->parent_version) return cursor;
    cursor = *it->second->parent_version;
  }
}

VersionId PromptRegistry::Root(VersionId id) const {
  std::lock_guard lock(mu_);
  return RootLocked(id);
}

std::shared_ptr<const PromptVersion> PromptRegistry::Refine(VersionId parent,
                                                            std::span<const Revision> revisions,
                                                            std::string note) {
  if (revisions.empty()) Fail(ErrorCode::kEmptyRevision, "refinement needs at least one revision");
  for (const Revision& r : revisions) {
    if (IsBlank(r.payload)) {
      Fail(ErrorCode::kEmptyRevision, "revision for '" + std::string(LabelName(r.label)) +
                                          "' has an empty payload");
    }
    if (r.label >= kNumLabels) Fail(ErrorCode::kUnknownLabel, "label id out of range");
  }

  std::lock_guard lock(mu_);
  auto it = versions_.find(parent);
  if (it == versions_.end()) {
    Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(parent) + " not found");
  }
  if (frozen_.count(parent)) {
    Fail(ErrorCode::kFrozenVersionViolation,
         "prompt version " + std::to_string(parent) + " is frozen and cannot be refined");
  }

  PromptVersion child = *it->second;
  child.version_id = versions_.rbegin()->first + 1;
  child.parent_version = parent;
  child.change_note = note.empty() ? DescribeRevisions(revisions) : std::move(note);
  for (const Revision& r : revisions) {
    LabelBlock& block = child.blocks[r.label];
    std::string payload = Trimmed(r.payload);
    switch (r.kind) {
      case RevisionKind::kSynonymAdded:
        AppendUnique(r.core_term ? block.core_terms : block.synonyms, std::move(payload));
        break;
      case RevisionKind::kClarificationAdded:
        AppendUnique(block.clarifications, std::move(payload));
        break;
      case RevisionKind::kExemplarAdded:
        AppendUnique(r.positive ? block.positive_exemplars : block.negative_exemplars,
                     std::move(payload));
        break;
    }
  }
  const VersionId id = child.version_id;
  AddLocked(std::move(child), true);
  return versions_.at(id);
}

void PromptRegistry::Freeze(VersionId id) {
  std::lock_guard lock(mu_);
  if (!versions_.count(id)) {
    Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(id) + " not found");
  }
  if (!frozen_.insert(id).second) return;
  nlohmann::ordered_json event;
  event["event"] = "freeze";
  event["version_id"] = id;
  Append(event);
}

bool PromptRegistry::IsFrozen(VersionId id) const {
  std::lock_guard lock(mu_);
  if (!versions_.count(id)) {
    Fail(ErrorCode::kNotFound, "prompt version " + std::to_string(id) + " not found");
  }
  return frozen_.count(id) > 0;
}

bool PromptRegistry::TryClaimLineage(VersionId id) {
  std::lock_guard lock(mu_);
  return claimed_roots_.insert(RootLocked(id)).second;
}

void PromptRegistry::ReleaseLineage(VersionId id) {
  std::lock_guard lock(mu_);
  claimed_roots_.erase(RootLocked(id));
}

}  // namespace cxrlabel
