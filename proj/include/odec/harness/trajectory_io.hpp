#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "odec/env/demonstrations.hpp"

namespace odec::harness {

inline constexpr int kTrajectoryFormatVersion = 1;

/// File-level metadata written as the first line.
struct TrajectoryHeader {
  std::string env;
  std::string mode;
  int agents = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<AgentId>> teams;  // index k holds team k+1

  bool operator==(const TrajectoryHeader&) const = default;
};

inline TrajectoryHeader header_for(const Environment& env, std::uint64_t seed) {
  return {std::string(env.tag()), std::string(to_string(env.mode())), env.agent_count(), seed, env.registry().teams()};
}

/// Line-delimited JSON. First line:
///   {"format":"odec-trajectories","version":1,"env":...,"mode":...,"agents":N,"seed":S,"teams":[[0],[0,1]],
///    "episode_seeds":[...],"terminal":[...]}
/// then one line per step:
///   {"ep":int,"t":int,"c":int,"agents":[{"id":int,"s":[ints],"a":int}],"r":float,"done":bool}
/// The header also lists each episode's reset seed and whether it ended by finishing the task.
inline void write_trajectories(std::ostream& os, const TrajectoryHeader& header, const TeamRegistry& registry,
                               const std::vector<Episode>& episodes) {
  nlohmann::ordered_json h;
  h["format"] = "odec-trajectories";
  h["version"] = kTrajectoryFormatVersion;
  h["env"] = header.env;
  h["mode"] = header.mode;
  h["agents"] = header.agents;
  h["seed"] = header.seed;
  h["teams"] = header.teams;
  h["episode_seeds"] = nlohmann::ordered_json::array();
  h["terminal"] = nlohmann::ordered_json::array();
  for (const auto& ep : episodes) {
    h["episode_seeds"].push_back(ep.seed);
    h["terminal"].push_back(ep.terminal);
  }
  os << h.dump() << '\n';
  for (std::size_t e = 0; e < episodes.size(); ++e) {
    const auto& ep = episodes[e];
    const auto& recs = ep.trajectory.records;
    for (std::size_t t = 0; t < recs.size(); ++t) {
      const auto& rec = recs[t];
      nlohmann::ordered_json line;
      line["ep"] = e;
      line["t"] = t;
      line["c"] = rec.team;
      line["agents"] = nlohmann::ordered_json::array();
      const auto& members = registry.members(rec.team);
      for (std::size_t k = 0; k < members.size(); ++k) {
        nlohmann::ordered_json agent;
        agent["id"] = members[k];
        agent["s"] = rec.state.locals[k];
        agent["a"] = rec.action.actions[k];
        line["agents"].push_back(std::move(agent));
      }
      line["r"] = ep.rewards[t];
      line["done"] = t + 1 == recs.size();
      os << line.dump() << '\n';
    }
  }
}

struct TrajectoryFile {
  TrajectoryHeader header;
  std::vector<Episode> episodes;
};

/// Parses and validates a trajectory stream against `registry` (when given).
inline TrajectoryFile read_trajectories(std::istream& is, const TeamRegistry* registry = nullptr,
                                        const TrajectoryLimits& limits = {}) {
  TrajectoryFile file;
  std::string line;
  long line_no = 0;
  auto fail = [&](const std::string& msg) {
    return Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + msg);
  };
  auto parse = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
  };

  std::vector<std::uint64_t> seeds;
  std::vector<bool> terminal;
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "line 1: missing header");
  ++line_no;
  try {
    const auto h = parse(line);
    if (h.at("format").get<std::string>() != "odec-trajectories") throw fail("not a trajectory file");
    if (h.at("version").get<int>() != kTrajectoryFormatVersion) throw fail("unsupported format version");
    file.header.env = h.at("env").get<std::string>();
    file.header.mode = h.at("mode").get<std::string>();
    file.header.agents = h.at("agents").get<int>();
    file.header.seed = h.at("seed").get<std::uint64_t>();
    file.header.teams = h.at("teams").get<std::vector<std::vector<AgentId>>>();
    seeds = h.at("episode_seeds").get<std::vector<std::uint64_t>>();
    terminal = h.at("terminal").get<std::vector<bool>>();
    if (seeds.size() != terminal.size()) throw fail("episode metadata lengths differ");
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("bad header: ") + e.what());
  }
  if (registry) {
    if (registry->agent_count() != file.header.agents || registry->teams() != file.header.teams)
      throw Error(ErrorCode::SchemaError, "file team registry does not match the environment");
  }
  TeamRegistry file_registry(std::max(1, file.header.agents));
  for (const auto& t : file.header.teams) file_registry.register_team(t);
  if (file_registry.teams() != file.header.teams) throw fail("team table is not in canonical order");

  Episode current;
  long expected_t = 0;
  auto close_episode = [&] {
    const std::size_t k = file.episodes.size();
    if (k >= seeds.size()) throw fail("more episodes than the header lists");
    current.seed = seeds[k];
    current.terminal = terminal[k];
    file.episodes.push_back(std::move(current));
    current = Episode{};
    expected_t = 0;
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) throw fail("empty line");
    const auto j = parse(line);
    try {
      if (j.at("ep").get<std::size_t>() != file.episodes.size()) throw fail("episode index out of sequence");
      if (j.at("t").get<long>() != expected_t) throw fail("step index out of sequence");
      StepRecord rec;
      rec.team = j.at("c").get<TeamId>();
      if (!file_registry.contains(rec.team)) throw fail("unknown team id " + std::to_string(rec.team));
      rec.state.team = rec.action.team = rec.team;
      const auto& members = file_registry.members(rec.team);
      const auto& agents = j.at("agents");
      if (agents.size() != members.size()) throw fail("agent list does not match team membership");
      for (std::size_t k = 0; k < agents.size(); ++k) {
        if (agents[k].at("id").get<AgentId>() != members[k]) throw fail("agent ids out of order");
        rec.state.locals.push_back(agents[k].at("s").get<LocalState>());
        rec.action.actions.push_back(agents[k].at("a").get<int>());
      }
      current.trajectory.records.push_back(std::move(rec));
      current.rewards.push_back(j.at("r").get<double>());
      ++expected_t;
      if (j.at("done").get<bool>()) close_episode();
    } catch (const nlohmann::json::exception& e) {
      throw fail(e.what());
    }
  }
  if (expected_t != 0) throw fail("file ends inside an episode");
  if (file.episodes.size() != seeds.size()) throw fail("header lists more episodes than the file holds");
  for (const auto& ep : file.episodes) {
    const auto v = validate_trajectory(ep.trajectory, file_registry, limits);
    if (!v.empty()) throw Error(ErrorCode::SchemaError, "invalid record: " + v.front().detail);
  }
  return file;
}

inline void save_trajectories(const std::string& path, const Environment& env, std::uint64_t seed,
                              const std::vector<Episode>& episodes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + path);
  write_trajectories(os, header_for(env, seed), env.registry(), episodes);
}

inline TrajectoryFile load_trajectories(const std::string& path, const Environment* env = nullptr) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot read " + path);
  if (!env) return read_trajectories(is);
  TrajectoryFile f = read_trajectories(is, &env->registry(), limits_for(*env));
  if (f.header.env != env->tag() || f.header.mode != to_string(env->mode()))
    throw Error(ErrorCode::SchemaError, "file was recorded on " + f.header.env + "/" + f.header.mode);
  return f;
}

inline std::vector<OpenTrajectory> trajectories_of(const std::vector<Episode>& episodes) {
  std::vector<OpenTrajectory> out;
  for (const auto& ep : episodes) out.push_back(ep.trajectory);
  return out;
}

}  // namespace odec::harness
