#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "odec/error.hpp"

namespace odec {

using AgentId = int;
using TeamId = int;

/// Bijection between non-empty agent subsets and team identifiers 1..|C|.
///
/// Identifiers are handed out lazily, in registration order. Members are
/// always stored sorted ascending, which is also the order in which team
/// states and team actions list their per-agent entries.
class TeamRegistry {
 public:
  TeamRegistry() = default;
  explicit TeamRegistry(int agent_count) : agent_count_(agent_count) {
    if (agent_count <= 0) throw Error(ErrorCode::InvalidTeam, "agent count must be positive");
  }

  int agent_count() const noexcept { return agent_count_; }
  int size() const noexcept { return static_cast<int>(members_.size()); }
  bool contains(TeamId id) const noexcept { return id >= 1 && id <= size(); }

  TeamId register_team(std::span<const AgentId> agents) {
    auto key = normalize(agents);
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
    members_.push_back(key);
    const TeamId id = size();
    ids_.emplace(std::move(key), id);
    return id;
  }
  TeamId register_team(std::initializer_list<AgentId> agents) {
    return register_team(std::span<const AgentId>(agents.begin(), agents.size()));
  }

  /// Identifier of an already registered subset; throws UnknownTeam otherwise.
  TeamId id_of(std::span<const AgentId> agents) const {
    auto it = ids_.find(normalize(agents));
    if (it == ids_.end()) throw Error(ErrorCode::UnknownTeam, "agent subset is not registered");
    return it->second;
  }

  const std::vector<AgentId>& members(TeamId id) const {
    if (!contains(id)) throw Error(ErrorCode::UnknownTeam, "team id " + std::to_string(id));
    return members_[static_cast<std::size_t>(id - 1)];
  }

  int cardinality(TeamId id) const { return static_cast<int>(members(id).size()); }

  bool is_member(TeamId id, AgentId agent) const {
    const auto& m = members(id);
    return std::binary_search(m.begin(), m.end(), agent);
  }

  /// Position of `agent` inside the team's member list, or -1.
  int slot_of(TeamId id, AgentId agent) const {
    const auto& m = members(id);
    auto it = std::lower_bound(m.begin(), m.end(), agent);
    return (it != m.end() && *it == agent) ? static_cast<int>(it - m.begin()) : -1;
  }

  /// Registered subsets in identifier order (index 0 holds team 1).
  const std::vector<std::vector<AgentId>>& teams() const noexcept { return members_; }

  friend bool operator==(const TeamRegistry& a, const TeamRegistry& b) {
    return a.agent_count_ == b.agent_count_ && a.members_ == b.members_;
  }

 private:
  std::vector<AgentId> normalize(std::span<const AgentId> agents) const {
    if (agents.empty()) throw Error(ErrorCode::InvalidTeam, "empty agent subset");
    std::vector<AgentId> key(agents.begin(), agents.end());
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    for (AgentId a : key) {
      if (a < 0 || a >= agent_count_)
        throw Error(ErrorCode::UnknownAgent,
                    "agent " + std::to_string(a) + " outside 0.." + std::to_string(agent_count_ - 1));
    }
    return key;
  }

  int agent_count_ = 1;
  std::map<std::vector<AgentId>, TeamId> ids_;
  std::vector<std::vector<AgentId>> members_;
};

}  // namespace odec
