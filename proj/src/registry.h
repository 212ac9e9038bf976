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

#ifndef CXRLABEL_REGISTRY_H_
#define CXRLABEL_REGISTRY_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "prompt.h"

namespace cxrlabel {

// The three ways a prompt is revised after error review.
enum class RevisionKind { kSynonymAdded, kClarificationAdded, kExemplarAdded };

std::string_view ToString(RevisionKind kind);
RevisionKind ParseRevisionKind(std::string_view text);

struct Revision {
  LabelId label = 0;
  RevisionKind kind = RevisionKind::kSynonymAdded;
  std::string payload;
  // kSynonymAdded: add as a core term instead of a synonym.
  bool core_term = false;
  // kExemplarAdded: positive or negative exemplar.
  bool positive = true;
};

// {"label", "kind", "payload", "polarity": "positive"|"negative",
//  "target": "synonym"|"core_term"}
Revision RevisionFromJson(const nlohmann::json& doc);
nlohmann::ordered_json ToJson(const Revision& revision);
std::vector<Revision> RevisionsFromJson(const nlohmann::json& doc);

// Append-only store of prompt versions. Versions are immutable once added;
// refining creates a child with a fresh, larger id. A frozen version can
// never gain children. Thread-safe.
//
// When opened on a file, every new version and every freeze is appended to
// it as one JSON line, and reopening replays the file.
class PromptRegistry {
 public:
  // Starts from `root`, in memory only.
  explicit PromptRegistry(PromptVersion root = RootPrompt());

  // Replays `log_path`, creating it with the root prompt if it is missing.
  static std::unique_ptr<PromptRegistry> Open(const std::filesystem::path& log_path);

  PromptRegistry(const PromptRegistry&) = delete;
  PromptRegistry& operator=(const PromptRegistry&) = delete;

  std::shared_ptr<const PromptVersion> Get(VersionId id) const;  // kNotFound
  bool Contains(VersionId id) const;
  std::vector<VersionId> Versions() const;
  std::vector<VersionId> Children(VersionId id) const;
  // Root first, `id` last.
  std::vector<VersionId> Lineage(VersionId id) const;
  VersionId Root(VersionId id) const;

  // Applies the revisions append-only to a copy of `parent`. Throws
  // kEmptyRevision (no revisions or a blank payload), kNotFound,
  // kFrozenVersionViolation.
  std::shared_ptr<const PromptVersion> Refine(VersionId parent, std::span<const Revision> revisions,
                                              std::string note = {});

  void Freeze(VersionId id);
  bool IsFrozen(VersionId id) const;

  // At most one optimization loop per lineage. Returns false when the
  // lineage holding `id` is already claimed.
  bool TryClaimLineage(VersionId id);
  void ReleaseLineage(VersionId id);

 private:
  void AddLocked(PromptVersion version, bool persist);
  void Append(const nlohmann::ordered_json& event);
  VersionId RootLocked(VersionId id) const;

  mutable std::mutex mu_;
  std::map<VersionId, std::shared_ptr<const PromptVersion>> versions_;
  std::set<VersionId> frozen_;
  std::set<VersionId> claimed_roots_;
  std::optional<std::filesystem::path> log_path_;
};

// Summary used as change_note, e.g. "+1 synonym (Pneumothorax); +1 negative
// exemplar (Fracture)".
std::string DescribeRevisions(std::span<const Revision> revisions);

}  // namespace cxrlabel

#endif  // CXRLABEL_REGISTRY_H_
